#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"
#include "spinspace.hpp"

namespace spinbath {

enum class SymmetryClass { XY, Heisenberg, HeisenbergType, Ising };
enum class Topology { Ring, Triangular, Full };
enum class Sector { S, E, SE };
enum class Axis { X, Y, Z };

inline std::string_view to_string(SymmetryClass s) noexcept
{
    switch (s) {
    case SymmetryClass::XY: return "xy";
    case SymmetryClass::Heisenberg: return "heisenberg";
    case SymmetryClass::HeisenbergType: return "heisenberg-type";
    case SymmetryClass::Ising: return "ising";
    }
    return "?";
}

inline std::string_view to_string(Topology t) noexcept
{
    switch (t) {
    case Topology::Ring: return "ring";
    case Topology::Triangular: return "triangular";
    case Topology::Full: return "full";
    }
    return "?";
}

inline std::string_view to_string(Sector s) noexcept
{
    switch (s) {
    case Sector::S: return "S";
    case Sector::E: return "E";
    case Sector::SE: return "SE";
    }
    return "?";
}

inline std::string_view to_string(Axis a) noexcept
{
    switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
    }
    return "?";
}

inline SymmetryClass parse_symmetry(std::string_view text)
{
    for (auto s : {SymmetryClass::XY, SymmetryClass::Heisenberg, SymmetryClass::HeisenbergType, SymmetryClass::Ising})
        if (text == to_string(s)) return s;
    throw Error(ErrorKind::Parse, "unknown symmetry '" + std::string(text) + "'");
}

inline Topology parse_topology(std::string_view text)
{
    for (auto t : {Topology::Ring, Topology::Triangular, Topology::Full})
        if (text == to_string(t)) return t;
    throw Error(ErrorKind::Parse, "unknown topology '" + std::string(text) + "'");
}

inline Sector parse_sector(std::string_view text)
{
    for (auto s : {Sector::S, Sector::E, Sector::SE})
        if (text == to_string(s)) return s;
    throw Error(ErrorKind::Parse, "unknown sector '" + std::string(text) + "'");
}

inline Axis parse_axis(std::string_view text)
{
    for (auto a : {Axis::X, Axis::Y, Axis::Z})
        if (text == to_string(a)) return a;
    throw Error(ErrorKind::Parse, "unknown axis '" + std::string(text) + "'");
}

/// One term -strength * S_a^axis S_b^axis, sites in global numbering
/// (system 0..n_S-1, environment n_S..n_S+n_E-1).
struct CouplingTerm {
    Sector sector;
    int site_a;
    int site_b;
    Axis axis;
    double strength;

    auto key() const { return std::make_tuple(to_string(sector), site_a, site_b, axis); }
    friend bool operator==(const CouplingTerm&, const CouplingTerm&) = default;
};

/// Immutable, canonically sorted list of two-spin terms.
class CouplingTable {
public:
    CouplingTable() = default;

    explicit CouplingTable(std::vector<CouplingTerm> terms) : terms_(std::move(terms))
    {
        for (const auto& t : terms_) {
            if (t.site_a < 0 || t.site_a >= t.site_b)
                throw Error(ErrorKind::BadTopology, "term sites must satisfy 0 <= a < b, got " +
                                                        std::to_string(t.site_a) + " " + std::to_string(t.site_b));
            if (!std::isfinite(t.strength)) throw Error(ErrorKind::BadArguments, "non-finite coupling strength");
        }
        std::sort(terms_.begin(), terms_.end(), [](const auto& l, const auto& r) { return l.key() < r.key(); });
        for (std::size_t k = 1; k < terms_.size(); ++k)
            if (terms_[k - 1].key() == terms_[k].key())
                throw Error(ErrorKind::BadTopology, "duplicate term " + std::string(to_string(terms_[k].sector)) +
                                                        " " + std::to_string(terms_[k].site_a) + " " +
                                                        std::to_string(terms_[k].site_b));
    }

    const std::vector<CouplingTerm>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }

    std::size_t count(Sector s) const
    {
        return static_cast<std::size_t>(
            std::count_if(terms_.begin(), terms_.end(), [s](const auto& t) { return t.sector == s; }));
    }

    friend bool operator==(const CouplingTable&, const CouplingTable&) = default;

private:
    std::vector<CouplingTerm> terms_;
};

using Bond = std::pair<int, int>;

/// Intra-sector couplings (system or environment).
struct SectorSpec {
    SymmetryClass symmetry = SymmetryClass::Heisenberg;
    Topology topology = Topology::Ring;
    std::optional<std::vector<Bond>> bonds; ///< overrides the topology when present
    double magnitude = 0.0;                 ///< J for the system, Omega for the environment
    std::uint64_t seed = 0;
};

/// System-environment couplings; every system spin meets every environment spin.
struct CouplingSpec {
    SymmetryClass symmetry = SymmetryClass::HeisenbergType;
    double magnitude = 0.0; ///< Delta
    std::uint64_t seed = 0;
};

struct ModelSpec {
    StatePartition partition{1, 0};
    SectorSpec system;
    SectorSpec environment;
    CouplingSpec coupling;
};

/// Bond list on local sites 0..n-1.
inline std::vector<Bond> topology_bonds(Topology topology, int n)
{
    std::vector<Bond> bonds;
    switch (topology) {
    case Topology::Ring:
        if (n == 2) bonds.emplace_back(0, 1);
        if (n >= 3)
            for (int i = 0; i < n; ++i) bonds.emplace_back(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
        break;
    case Topology::Full:
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) bonds.emplace_back(i, j);
        break;
    case Topology::Triangular:
        // 2x3 strip: rows 0-1-2 and 3-4-5, rungs, and the 1-3, 2-4 diagonals
        if (n != 6)
            throw Error(ErrorKind::BadTopology,
                        "triangular topology is defined for 6 spins only (got " + std::to_string(n) +
                            "); supply an explicit bond list");
        bonds = {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {0, 3}, {1, 4}, {2, 5}, {1, 3}, {2, 4}};
        break;
    }
    return bonds;
}

namespace detail {

inline std::vector<Bond> sector_bonds(const SectorSpec& spec, int n, std::string_view label)
{
    if (!spec.bonds) return topology_bonds(spec.topology, n);
    std::vector<Bond> bonds;
    for (auto [a, b] : *spec.bonds) {
        if (a == b || a < 0 || b < 0 || a >= n || b >= n)
            throw Error(ErrorKind::BadTopology, std::string(label) + " bond " + std::to_string(a) + "-" +
                                                    std::to_string(b) + " invalid for " + std::to_string(n) +
                                                    " spins");
        bonds.emplace_back(std::min(a, b), std::max(a, b));
    }
    return bonds;
}

/// Axis strengths for one bond; HeisenbergType draws each axis from U[-|m|, |m|].
template <typename Rng>
std::array<double, 3> axis_strengths(SymmetryClass symmetry, double magnitude, Rng& rng)
{
    switch (symmetry) {
    case SymmetryClass::XY: return {magnitude, magnitude, 0.0};
    case SymmetryClass::Heisenberg: return {magnitude, magnitude, magnitude};
    case SymmetryClass::Ising: return {0.0, 0.0, magnitude};
    case SymmetryClass::HeisenbergType: {
        const double m = std::abs(magnitude);
        if (m == 0.0) return {0.0, 0.0, 0.0};
        std::uniform_real_distribution<double> uniform(-m, m);
        std::array<double, 3> out{};
        for (auto& v : out) v = uniform(rng);
        return out;
    }
    }
    return {0.0, 0.0, 0.0};
}

template <typename Rng>
void emit_bond(std::vector<CouplingTerm>& terms, Sector sector, int a, int b, SymmetryClass symmetry,
               double magnitude, Rng& rng)
{
    const auto strengths = axis_strengths(symmetry, magnitude, rng);
    for (int axis = 0; axis < 3; ++axis)
        if (strengths[axis] != 0.0)
            terms.push_back({sector, a, b, static_cast<Axis>(axis), strengths[axis]});
}

} // namespace detail

/// Builds H_S + H_E + H_SE as a flat term list. Zero-strength terms are
/// omitted. Each sector draws its disorder from its own seed.
inline CouplingTable build_model(const ModelSpec& spec)
{
    for (double m : {spec.system.magnitude, spec.environment.magnitude, spec.coupling.magnitude})
        if (!std::isfinite(m)) throw Error(ErrorKind::BadArguments, "coupling magnitude must be finite");

    const int ns = spec.partition.n_system();
    const int ne = spec.partition.n_environment();
    std::vector<CouplingTerm> terms;

    {
        std::mt19937_64 rng(spec.system.seed);
        for (auto [a, b] : detail::sector_bonds(spec.system, ns, "system"))
            detail::emit_bond(terms, Sector::S, a, b, spec.system.symmetry, spec.system.magnitude, rng);
    }
    {
        std::mt19937_64 rng(spec.environment.seed);
        for (auto [a, b] : detail::sector_bonds(spec.environment, ne, "environment"))
            detail::emit_bond(terms, Sector::E, a + ns, b + ns, spec.environment.symmetry,
                              spec.environment.magnitude, rng);
    }
    {
        std::mt19937_64 rng(spec.coupling.seed);
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ne; ++j)
                detail::emit_bond(terms, Sector::SE, i, ns + j, spec.coupling.symmetry, spec.coupling.magnitude, rng);
    }
    return CouplingTable(std::move(terms));
}

/// Shortest text that reads back to the same double (at most 17 significant
/// digits), always carrying a decimal point: 1 -> "1.0".
inline std::string format_real(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    for (int precision = 1; precision < 17; ++precision) {
        char shorter[32];
        std::snprintf(shorter, sizeof shorter, "%.*g", precision, value);
        if (std::strtod(shorter, nullptr) == value) {
            std::snprintf(buf, sizeof buf, "%s", shorter);
            break;
        }
    }
    std::string out(buf);
    if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
    return out;
}

inline constexpr std::string_view coupling_dump_header = "# sector a b axis strength";

inline std::string dump_model(const CouplingTable& table)
{
    std::string out(coupling_dump_header);
    out += '\n';
    for (const auto& t : table.terms()) {
        out += to_string(t.sector);
        out += ' ' + std::to_string(t.site_a) + ' ' + std::to_string(t.site_b) + ' ';
        out += to_string(t.axis);
        out += ' ' + format_real(t.strength) + '\n';
    }
    return out;
}

inline CouplingTable parse_model(std::string_view text)
{
    std::vector<CouplingTerm> terms;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        std::string sector, axis, strength;
        int a = 0, b = 0;
        if (!(fields >> sector >> a >> b >> axis >> strength))
            throw Error(ErrorKind::Parse, "coupling dump line " + std::to_string(line_no) + " malformed");
        char* end = nullptr;
        const double value = std::strtod(strength.c_str(), &end);
        if (end == strength.c_str() || *end != '\0')
            throw Error(ErrorKind::Parse, "coupling dump line " + std::to_string(line_no) + ": bad strength");
        terms.push_back({parse_sector(sector), a, b, parse_axis(axis), value});
    }
    return CouplingTable(std::move(terms));
}

} // namespace spinbath
