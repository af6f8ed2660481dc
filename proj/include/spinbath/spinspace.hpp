#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "vector_ops.hpp"

namespace spinbath {

inline constexpr int max_system_spins = 10;
inline constexpr int max_environment_spins = 26;

/// Sizes of the system and environment Hilbert spaces. The global basis index
/// is k = i + dim_S * p: system spins occupy the low-order bits, environment
/// spins the high-order bits. Bit value 0 is spin up.
class StatePartition {
public:
    StatePartition(int n_system, int n_environment)
        : n_system_(n_system), n_environment_(n_environment)
    {
        if (n_system < 1 || n_system > max_system_spins)
            throw Error(ErrorKind::OutOfRange,
                        "system spin count " + std::to_string(n_system) + " outside [1, " +
                            std::to_string(max_system_spins) + "]");
        if (n_environment < 0 || n_environment > max_environment_spins)
            throw Error(ErrorKind::OutOfRange,
                        "environment spin count " + std::to_string(n_environment) + " outside [0, " +
                            std::to_string(max_environment_spins) + "]");
    }

    int n_system() const noexcept { return n_system_; }
    int n_environment() const noexcept { return n_environment_; }
    int n_total() const noexcept { return n_system_ + n_environment_; }
    std::uint64_t dim_system() const noexcept { return std::uint64_t{1} << n_system_; }
    std::uint64_t dim_environment() const noexcept { return std::uint64_t{1} << n_environment_; }
    std::uint64_t dim() const noexcept { return std::uint64_t{1} << n_total(); }

    std::uint64_t index(std::uint64_t i, std::uint64_t p) const noexcept { return i + dim_system() * p; }
    std::uint64_t system_index(std::uint64_t k) const noexcept { return k & (dim_system() - 1); }
    std::uint64_t environment_index(std::uint64_t k) const noexcept { return k >> n_system_; }

    friend bool operator==(const StatePartition&, const StatePartition&) = default;

private:
    int n_system_;
    int n_environment_;
};

/// Pure state of the closed system, amplitudes c(i,p) stored at i + dim_S * p.
class StateVector {
public:
    explicit StateVector(StatePartition partition)
        : partition_(partition), amplitudes_(partition.dim(), cplx{0.0, 0.0})
    {
    }

    StateVector(StatePartition partition, std::vector<cplx> amplitudes)
        : partition_(partition), amplitudes_(std::move(amplitudes))
    {
        if (amplitudes_.size() != partition_.dim())
            throw Error(ErrorKind::DimensionMismatch,
                        "state has " + std::to_string(amplitudes_.size()) + " amplitudes, partition needs " +
                            std::to_string(partition_.dim()));
    }

    const StatePartition& partition() const noexcept { return partition_; }
    std::size_t size() const noexcept { return amplitudes_.size(); }

    std::span<const cplx> amplitudes() const noexcept { return amplitudes_; }
    std::span<cplx> amplitudes() noexcept { return amplitudes_; }

    cplx operator[](std::size_t k) const noexcept { return amplitudes_[k]; }
    cplx& operator[](std::size_t k) noexcept { return amplitudes_[k]; }

    cplx at(std::uint64_t i, std::uint64_t p) const { return amplitudes_.at(partition_.index(i, p)); }

    double norm() const { return spinbath::norm(amplitudes_); }

private:
    StatePartition partition_;
    std::vector<cplx> amplitudes_;
};

enum class InitialStateKind { Ground, Random, UU, UD, RR };

enum class Subsystem { System, Environment };

inline std::string_view to_string(InitialStateKind kind) noexcept
{
    switch (kind) {
    case InitialStateKind::Ground: return "GROUND";
    case InitialStateKind::Random: return "RANDOM";
    case InitialStateKind::UU: return "UU";
    case InitialStateKind::UD: return "UD";
    case InitialStateKind::RR: return "RR";
    }
    return "?";
}

inline InitialStateKind parse_initial_state_kind(std::string_view text)
{
    for (auto kind : {InitialStateKind::Ground, InitialStateKind::Random, InitialStateKind::UU,
                      InitialStateKind::UD, InitialStateKind::RR})
        if (text == to_string(kind)) return kind;
    throw Error(ErrorKind::Parse, "unknown initial state '" + std::string(text) + "'");
}

inline int spin_count(const StatePartition& partition, Subsystem which) noexcept
{
    return which == Subsystem::System ? partition.n_system() : partition.n_environment();
}

// Seeds -------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Independent stream seed for one named purpose, derived from a master seed.
inline std::uint64_t subseed(std::uint64_t master, std::string_view purpose) noexcept
{
    return splitmix64(master ^ splitmix64(fnv1a64(purpose)));
}

// Initial states ----------------------------------------------------------

/// UU: every spin up. UD: Neel pattern up, down, up, ... along the site order.
inline std::vector<cplx> make_basis_state(int n_spins, InitialStateKind kind)
{
    if (kind != InitialStateKind::UU && kind != InitialStateKind::UD)
        throw Error(ErrorKind::InvalidKind, std::string(to_string(kind)) + " is not a basis-state kind");
    if (kind == InitialStateKind::UD && n_spins < 2)
        throw Error(ErrorKind::InvalidKind, "UD needs at least two spins, got " + std::to_string(n_spins));

    std::vector<cplx> state(std::size_t{1} << n_spins, cplx{0.0, 0.0});
    std::uint64_t index = 0;
    if (kind == InitialStateKind::UD)
        for (int site = 1; site < n_spins; site += 2) index |= std::uint64_t{1} << site;
    state[index] = 1.0;
    return state;
}

inline std::vector<cplx> make_basis_state(const StatePartition& partition, InitialStateKind kind, Subsystem which)
{
    return make_basis_state(spin_count(partition, which), kind);
}

/// RANDOM: Haar-uniform vector (complex Gaussian, normalized).
/// RR: product of single-spin states uniform on the Bloch sphere.
inline std::vector<cplx> make_random_state(int n_spins, InitialStateKind kind, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const std::size_t dim = std::size_t{1} << n_spins;

    if (kind == InitialStateKind::Random) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<cplx> state(dim);
        for (auto& a : state) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            a = {re, im};
        }
        scale(std::span<cplx>(state), 1.0 / norm(state));
        return state;
    }

    if (kind == InitialStateKind::RR) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<cplx> state{cplx{1.0, 0.0}};
        for (int site = 0; site < n_spins; ++site) {
            const double cos_theta = 2.0 * unit(rng) - 1.0;
            const double phi = 2.0 * std::numbers::pi * unit(rng);
            const double up = std::sqrt(0.5 * (1.0 + cos_theta));
            const double down = std::sqrt(0.5 * (1.0 - cos_theta));
            const cplx qubit[2] = {cplx{up, 0.0}, std::polar(down, phi)};
            // new site is the most significant bit so far
            std::vector<cplx> next(state.size() * 2);
            for (std::size_t b = 0; b < 2; ++b)
                for (std::size_t k = 0; k < state.size(); ++k) next[k + b * state.size()] = state[k] * qubit[b];
            state = std::move(next);
        }
        return state;
    }

    throw Error(ErrorKind::InvalidKind, std::string(to_string(kind)) + " is not a random-state kind");
}

inline std::vector<cplx> make_random_state(const StatePartition& partition, InitialStateKind kind, Subsystem which,
                                           std::uint64_t seed)
{
    return make_random_state(spin_count(partition, which), kind, seed);
}

/// amplitudes[i + dim_S * p] = system[i] * environment[p]
inline StateVector tensor_product(std::span<const cplx> system, std::span<const cplx> environment,
                                  const StatePartition& partition)
{
    if (system.size() != partition.dim_system() || environment.size() != partition.dim_environment())
        throw Error(ErrorKind::DimensionMismatch,
                    "factor sizes (" + std::to_string(system.size()) + ", " + std::to_string(environment.size()) +
                        ") do not match partition (" + std::to_string(partition.dim_system()) + ", " +
                        std::to_string(partition.dim_environment()) + ")");
    std::vector<cplx> amplitudes(partition.dim());
    const std::size_t ds = system.size();
    for (std::size_t p = 0; p < environment.size(); ++p)
        for (std::size_t i = 0; i < ds; ++i) amplitudes[i + ds * p] = system[i] * environment[p];
    return StateVector(partition, std::move(amplitudes));
}

} // namespace spinbath
