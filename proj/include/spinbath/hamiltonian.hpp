#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "spinspace.hpp"
#include "vector_ops.hpp"

namespace spinbath {

enum class SectorFilter { All, S, E, SE };

inline bool passes(SectorFilter filter, Sector sector) noexcept
{
    switch (filter) {
    case SectorFilter::All: return true;
    case SectorFilter::S: return sector == Sector::S;
    case SectorFilter::E: return sector == Sector::E;
    case SectorFilter::SE: return sector == Sector::SE;
    }
    return false;
}

inline constexpr int max_dense_spins = 12;

/// Matrix-free spin-1/2 operator  -sum c_ab^alpha S_a^alpha S_b^alpha  on
/// n_sites qubits (bit 0 = spin up).
///
/// The xx and yy parts of one bond flip bits a and b together. With
/// S^y = (i/2)(|dn><up| - |up><dn|) the matrix element of the flip is
///   -(c_x - c_y)/4   when bits a and b are equal,
///   -(c_x + c_y)/4   when they differ,
/// so the operator is real symmetric in the computational basis.
/// The zz part is diagonal: -c_z/4 for equal bits, +c_z/4 otherwise.
class SpinOperator {
public:
    struct Flip {
        std::uint64_t mask;
        unsigned a;
        unsigned b;
        std::array<double, 2> coef; ///< indexed by parity of bits a and b
    };
    struct ZZ {
        unsigned a;
        unsigned b;
        double coef; ///< value when the bits are equal; negated otherwise
    };

    SpinOperator() = default;

    /// Terms use local site numbers 0..n_sites-1.
    SpinOperator(int n_sites, std::span<const CouplingTerm> terms, bool precompute_diagonal = true)
        : n_sites_(n_sites)
    {
        if (n_sites < 0 || n_sites > 40) throw Error(ErrorKind::OutOfRange, "site count out of range");
        std::map<std::pair<int, int>, std::array<double, 3>> bonds;
        for (const auto& t : terms) {
            if (t.site_a < 0 || t.site_b >= n_sites || t.site_a >= t.site_b)
                throw Error(ErrorKind::DimensionMismatch, "term sites " + std::to_string(t.site_a) + "," +
                                                              std::to_string(t.site_b) + " outside " +
                                                              std::to_string(n_sites) + " sites");
            bonds[{t.site_a, t.site_b}][static_cast<int>(t.axis)] += t.strength;
            bound_ += std::abs(t.strength) / 4.0;
        }
        for (const auto& [ab, c] : bonds) {
            const auto a = static_cast<unsigned>(ab.first);
            const auto b = static_cast<unsigned>(ab.second);
            if (c[0] != 0.0 || c[1] != 0.0) {
                const std::uint64_t mask = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
                flips_.push_back({mask, a, b, {-(c[0] - c[1]) / 4.0, -(c[0] + c[1]) / 4.0}});
            }
            if (c[2] != 0.0) zz_.push_back({a, b, -c[2] / 4.0});
        }
        if (precompute_diagonal) {
            std::vector<double> diagonal(dim());
            for (std::uint64_t k = 0; k < dim(); ++k) diagonal[k] = diagonal_at(k);
            diagonal_ = std::move(diagonal);
        }
    }

    int n_sites() const noexcept { return n_sites_; }
    std::uint64_t dim() const noexcept { return std::uint64_t{1} << n_sites_; }
    const std::vector<Flip>& flips() const noexcept { return flips_; }
    const std::vector<ZZ>& zz() const noexcept { return zz_; }

    /// Sum of |c|/4 over all terms: a rigorous bound on the operator 2-norm.
    double bound() const noexcept { return bound_; }

    double diagonal_at(std::uint64_t k) const noexcept
    {
        if (!diagonal_.empty()) return diagonal_[k];
        double d = 0.0;
        for (const auto& z : zz_) d += (((k >> z.a) ^ (k >> z.b)) & 1U) ? -z.coef : z.coef;
        return d;
    }

    /// out = alpha * H in + beta * out. With beta == 0 the old contents of
    /// out are ignored. out may alias neither in nor anything in reads except
    /// at the same index (out[k] only reads out[k]).
    void apply(std::span<const cplx> in, std::span<cplx> out, double alpha = 1.0, double beta = 0.0) const
    {
        if (in.size() != dim() || out.size() != dim())
            throw Error(ErrorKind::DimensionMismatch, "operator dimension " + std::to_string(dim()) +
                                                          " vs vectors " + std::to_string(in.size()) + ", " +
                                                          std::to_string(out.size()));
        const Flip* flips = flips_.data();
        const std::size_t n_flips = flips_.size();
        const cplx* src = in.data();
        cplx* dst = out.data();
        const auto n = static_cast<std::ptrdiff_t>(dim());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t kk = 0; kk < n; ++kk) {
            const auto k = static_cast<std::uint64_t>(kk);
            cplx acc = diagonal_at(k) * src[k];
            for (std::size_t f = 0; f < n_flips; ++f) {
                const Flip& fl = flips[f];
                acc += fl.coef[((k >> fl.a) ^ (k >> fl.b)) & 1U] * src[k ^ fl.mask];
            }
            dst[k] = beta == 0.0 ? alpha * acc : alpha * acc + beta * dst[k];
        }
    }

private:
    int n_sites_ = 0;
    double bound_ = 0.0;
    std::vector<Flip> flips_;
    std::vector<ZZ> zz_;
    std::vector<double> diagonal_;
};

/// Dense matrix of a small operator, built entry by entry from the same
/// element rules as SpinOperator::apply.
inline Eigen::MatrixXcd build_dense(const SpinOperator& op)
{
    if (op.n_sites() > max_dense_spins)
        throw Error(ErrorKind::TooLarge, "dense build limited to " + std::to_string(1 << max_dense_spins) +
                                             " states, operator has " + std::to_string(op.dim()));
    const auto n = static_cast<Eigen::Index>(op.dim());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (std::uint64_t k = 0; k < op.dim(); ++k) {
        m(k, k) += op.diagonal_at(k);
        for (const auto& f : op.flips()) m(k ^ f.mask, k) += f.coef[((k >> f.a) ^ (k >> f.b)) & 1U];
    }
    return m;
}

/// H = H_S + H_E + H_SE bound to a partition, with per-sector views.
class HamiltonianHandle {
public:
    HamiltonianHandle(StatePartition partition, CouplingTable table)
        : partition_(partition), table_(std::move(table))
    {
        const int ns = partition_.n_system();
        const int nt = partition_.n_total();
        std::array<std::vector<CouplingTerm>, 3> by_sector;
        for (const auto& t : table_.terms()) {
            bool ok = false;
            switch (t.sector) {
            case Sector::S: ok = t.site_b < ns; break;
            case Sector::E: ok = t.site_a >= ns && t.site_b < nt; break;
            case Sector::SE: ok = t.site_a < ns && t.site_b >= ns && t.site_b < nt; break;
            }
            if (!ok)
                throw Error(ErrorKind::DimensionMismatch,
                            std::string(to_string(t.sector)) + " term " + std::to_string(t.site_a) + "-" +
                                std::to_string(t.site_b) + " does not fit partition (" + std::to_string(ns) +
                                ", " + std::to_string(partition_.n_environment()) + ")");
            by_sector[static_cast<int>(t.sector)].push_back(t);
        }
        full_ = SpinOperator(nt, table_.terms(), true);
        for (int s = 0; s < 3; ++s) sectors_[s] = SpinOperator(nt, by_sector[s], false);
    }

    const StatePartition& partition() const noexcept { return partition_; }
    const CouplingTable& table() const noexcept { return table_; }

    const SpinOperator& op(SectorFilter filter = SectorFilter::All) const noexcept
    {
        switch (filter) {
        case SectorFilter::S: return sectors_[0];
        case SectorFilter::E: return sectors_[1];
        case SectorFilter::SE: return sectors_[2];
        case SectorFilter::All: break;
        }
        return full_;
    }

private:
    StatePartition partition_;
    CouplingTable table_;
    SpinOperator full_;
    std::array<SpinOperator, 3> sectors_;
};

inline void check_dimension(const HamiltonianHandle& h, const StateVector& psi)
{
    if (psi.partition() != h.partition())
        throw Error(ErrorKind::DimensionMismatch, "state partition (" + std::to_string(psi.partition().n_system()) +
                                                      ", " + std::to_string(psi.partition().n_environment()) +
                                                      ") differs from Hamiltonian partition (" +
                                                      std::to_string(h.partition().n_system()) + ", " +
                                                      std::to_string(h.partition().n_environment()) + ")");
}

/// Returns H psi (not normalized).
inline StateVector apply(const HamiltonianHandle& h, const StateVector& psi, SectorFilter filter = SectorFilter::All)
{
    check_dimension(h, psi);
    StateVector out(h.partition());
    h.op(filter).apply(psi.amplitudes(), out.amplitudes());
    return out;
}

inline Eigen::MatrixXcd build_dense(const HamiltonianHandle& h, SectorFilter filter = SectorFilter::All)
{
    return build_dense(h.op(filter));
}

/// R = sum |strength| / 4 >= ||H||_2.
inline double spectral_bound(const HamiltonianHandle& h, SectorFilter filter = SectorFilter::All)
{
    return h.op(filter).bound();
}

inline double energy_expectation(const HamiltonianHandle& h, const StateVector& psi,
                                 SectorFilter filter = SectorFilter::All)
{
    const StateVector hpsi = apply(h, psi, filter);
    const cplx e = inner(psi.amplitudes(), hpsi.amplitudes());
    if (std::abs(e.imag()) > 1e-12 * std::max(1.0, std::abs(e.real())))
        throw Error(ErrorKind::NotHermitian, "energy expectation has imaginary part " + std::to_string(e.imag()));
    return e.real();
}

/// H_S alone on the n_S system qubits.
inline SpinOperator system_operator(const CouplingTable& table, const StatePartition& partition)
{
    std::vector<CouplingTerm> terms;
    for (const auto& t : table.terms())
        if (t.sector == Sector::S) terms.push_back(t);
    return SpinOperator(partition.n_system(), terms);
}

/// H_E alone on the n_E environment qubits (sites renumbered from 0).
inline SpinOperator environment_operator(const CouplingTable& table, const StatePartition& partition)
{
    std::vector<CouplingTerm> terms;
    const int ns = partition.n_system();
    for (auto t : table.terms())
        if (t.sector == Sector::E) {
            t.site_a -= ns;
            t.site_b -= ns;
            terms.push_back(t);
        }
    return SpinOperator(partition.n_environment(), terms);
}

} // namespace spinbath
