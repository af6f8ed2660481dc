#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"

using namespace spinbath;

namespace {

ModelSpec system_only(int n, SymmetryClass symmetry, Topology topology, double magnitude, std::uint64_t seed = 0)
{
    ModelSpec m;
    m.partition = StatePartition(n, 0);
    m.system = {symmetry, topology, std::nullopt, magnitude, seed};
    return m;
}

ModelSpec bath_only(int n, SymmetryClass symmetry, Topology topology, double magnitude, std::uint64_t seed)
{
    ModelSpec m;
    m.partition = StatePartition(1, n);
    m.environment = {symmetry, topology, std::nullopt, magnitude, seed};
    return m;
}

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Parse;
}

} // namespace

TEST(BuildModel, HeisenbergRingOfFour)
{
    const auto table = build_model(oracle::ring4_spec());
    ASSERT_EQ(table.size(), 12u);
    std::set<std::pair<int, int>> bonds;
    for (const auto& t : table.terms()) {
        EXPECT_EQ(t.sector, Sector::S);
        EXPECT_EQ(t.strength, -1.0);
        bonds.insert({t.site_a, t.site_b});
    }
    EXPECT_EQ(bonds, (std::set<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {0, 3}}));
}

TEST(BuildModel, IsingRingOfThree)
{
    const auto table = build_model(system_only(3, SymmetryClass::Ising, Topology::Ring, 2.0));
    ASSERT_EQ(table.size(), 3u);
    for (const auto& t : table.terms()) {
        EXPECT_EQ(t.axis, Axis::Z);
        EXPECT_EQ(t.strength, 2.0);
    }
}

TEST(BuildModel, SpinGlassTermCount)
{
    const auto table = build_model(bath_only(5, SymmetryClass::HeisenbergType, Topology::Full, 1.0, 42));
    EXPECT_EQ(table.count(Sector::E), 30u);
    for (const auto& t : table.terms()) {
        EXPECT_GE(t.site_a, 1); // environment sites follow the single system spin
        EXPECT_LE(std::abs(t.strength), 1.0);
    }
}

TEST(BuildModel, SpinGlassStrengthLaw)
{
    // |U[-1, 1]| has mean 1/2
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const auto table = build_model(bath_only(5, SymmetryClass::HeisenbergType, Topology::Full, 1.0, seed));
        for (const auto& t : table.terms()) sum += std::abs(t.strength);
        count += table.size();
    }
    const double mean = sum / static_cast<double>(count);
    EXPECT_GE(mean, 0.49);
    EXPECT_LE(mean, 0.51);
}

TEST(BuildModel, BondCounts)
{
    for (int n : {3, 4, 7}) {
        EXPECT_EQ(topology_bonds(Topology::Ring, n).size(), static_cast<std::size_t>(n));
        EXPECT_EQ(topology_bonds(Topology::Full, n).size(), static_cast<std::size_t>(n * (n - 1) / 2));
    }
    EXPECT_EQ(topology_bonds(Topology::Ring, 2).size(), 1u);
    EXPECT_EQ(topology_bonds(Topology::Ring, 1).size(), 0u);

    ModelSpec m;
    m.partition = StatePartition(3, 4);
    m.coupling = {SymmetryClass::Ising, 0.3, 0};
    EXPECT_EQ(build_model(m).count(Sector::SE), 12u);
}

TEST(BuildModel, TriangularStrip)
{
    const auto bonds = topology_bonds(Topology::Triangular, 6);
    const std::vector<Bond> expected = {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {0, 3}, {1, 4}, {2, 5}, {1, 3}, {2, 4}};
    EXPECT_EQ(bonds, expected);
    EXPECT_EQ(kind_of([] { topology_bonds(Topology::Triangular, 5); }), ErrorKind::BadTopology);
    EXPECT_EQ(kind_of([] { build_model(system_only(4, SymmetryClass::XY, Topology::Triangular, 1.0)); }),
              ErrorKind::BadTopology);
}

TEST(BuildModel, ExplicitBondsOverrideTopology)
{
    auto m = system_only(4, SymmetryClass::Ising, Topology::Triangular, 1.0);
    m.system.bonds = std::vector<Bond>{{2, 0}, {1, 3}};
    const auto table = build_model(m);
    ASSERT_EQ(table.size(), 2u);
    EXPECT_EQ(table.terms()[0].site_a, 0);
    EXPECT_EQ(table.terms()[0].site_b, 2);

    m.system.bonds = std::vector<Bond>{{0, 4}};
    EXPECT_EQ(kind_of([&] { build_model(m); }), ErrorKind::BadTopology);
    m.system.bonds = std::vector<Bond>{{1, 1}};
    EXPECT_EQ(kind_of([&] { build_model(m); }), ErrorKind::BadTopology);
}

TEST(BuildModel, SymmetryAxisConstraints)
{
    const auto xy = build_model(system_only(5, SymmetryClass::XY, Topology::Full, 0.7));
    for (const auto& t : xy.terms()) {
        EXPECT_NE(t.axis, Axis::Z);
        EXPECT_EQ(t.strength, 0.7);
    }
    EXPECT_EQ(xy.size(), 20u);

    const auto heis = build_model(system_only(5, SymmetryClass::Heisenberg, Topology::Ring, 0.7));
    EXPECT_EQ(heis.size(), 15u);

    const auto ising = build_model(system_only(5, SymmetryClass::Ising, Topology::Ring, -0.7));
    for (const auto& t : ising.terms()) EXPECT_EQ(t.axis, Axis::Z);
}

TEST(BuildModel, DeterministicPerSectorSeeds)
{
    auto spec = oracle::random_model_spec(3, 4, 9);
    const auto a = build_model(spec);
    EXPECT_EQ(a, build_model(spec));

    // changing only the system seed leaves the environment realization alone
    spec.system.seed += 1;
    const auto b = build_model(spec);
    EXPECT_NE(a, b);
    std::vector<CouplingTerm> ea, eb;
    for (const auto& t : a.terms())
        if (t.sector != Sector::S) ea.push_back(t);
    for (const auto& t : b.terms())
        if (t.sector != Sector::S) eb.push_back(t);
    EXPECT_EQ(ea, eb);
}

TEST(BuildModel, ZeroDeltaDecouples)
{
    auto spec = oracle::random_model_spec(2, 3, 1);
    spec.coupling.magnitude = 0.0;
    EXPECT_EQ(build_model(spec).count(Sector::SE), 0u);
}

TEST(BuildModel, NonFiniteMagnitude)
{
    auto spec = oracle::ring4_spec();
    spec.system.magnitude = std::nan("");
    EXPECT_EQ(kind_of([&] { build_model(spec); }), ErrorKind::BadArguments);
}

TEST(CouplingTableTest, RejectsDuplicatesAndBadSites)
{
    EXPECT_EQ(kind_of([] {
                  CouplingTable({{Sector::S, 0, 1, Axis::X, 1.0}, {Sector::S, 0, 1, Axis::X, 2.0}});
              }),
              ErrorKind::BadTopology);
    EXPECT_EQ(kind_of([] { CouplingTable({{Sector::S, 1, 0, Axis::X, 1.0}}); }), ErrorKind::BadTopology);
    EXPECT_NO_THROW(CouplingTable({{Sector::S, 0, 1, Axis::X, 1.0}, {Sector::S, 0, 1, Axis::Y, 2.0}}));
}

TEST(Dump, EmptyTableIsHeaderOnly)
{
    EXPECT_EQ(dump_model(CouplingTable{}), std::string(coupling_dump_header) + "\n");
}

TEST(Dump, SingleTerm)
{
    const CouplingTable t({{Sector::S, 0, 1, Axis::Z, 1.0}});
    EXPECT_EQ(dump_model(t), std::string(coupling_dump_header) + "\nS 0 1 z 1.0\n");
}

TEST(Dump, RoundTripIsLossless)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto spec = oracle::random_model_spec(2, 3, seed);
        spec.system.topology = Topology::Ring;
        const auto table = build_model(spec);
        const std::string text = dump_model(table);
        EXPECT_EQ(parse_model(text), table);
        EXPECT_EQ(dump_model(parse_model(text)), text);
    }
    const auto thirty = build_model(bath_only(5, SymmetryClass::HeisenbergType, Topology::Full, 1.0, 77));
    ASSERT_EQ(thirty.size(), 30u);
    EXPECT_EQ(parse_model(dump_model(thirty)), thirty);
}

TEST(Dump, SortedLexicographically)
{
    const auto table = build_model(oracle::random_model_spec(2, 2, 5));
    std::vector<std::string> lines;
    std::istringstream in(dump_model(table));
    for (std::string line; std::getline(in, line);)
        if (line[0] != '#') lines.push_back(line.substr(0, line.rfind(' ')));
    EXPECT_TRUE(std::is_sorted(lines.begin(), lines.end()));
}

TEST(Dump, FormatRealIsShortestRoundTrip)
{
    EXPECT_EQ(format_real(1.0), "1.0");
    EXPECT_EQ(format_real(-0.3), "-0.3");
    EXPECT_EQ(format_real(1e-20), "1e-20");
    for (double v : {0.1 + 0.2, 1.0 / 3.0, -2.718281828459045, 6.02e23})
        EXPECT_EQ(std::strtod(format_real(v).c_str(), nullptr), v);
}

TEST(Dump, MalformedLines)
{
    EXPECT_EQ(kind_of([] { parse_model("S 0 1 z\n"); }), ErrorKind::Parse);
    EXPECT_EQ(kind_of([] { parse_model("S 0 1 z 1.0x\n"); }), ErrorKind::Parse);
    EXPECT_EQ(kind_of([] { parse_model("Q 0 1 z 1.0\n"); }), ErrorKind::Parse);
    EXPECT_EQ(kind_of([] { parse_model("S 0 1 w 1.0\n"); }), ErrorKind::Parse);
}
