#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using namespace spinbath;

namespace {

constexpr double pi = std::numbers::pi;

HamiltonianHandle random_handle(int ns, int ne, std::uint64_t seed)
{
    const auto spec = oracle::random_model_spec(ns, ne, seed);
    return HamiltonianHandle(spec.partition, build_model(spec));
}

double max_diff(const StateVector& a, const oracle::Vector& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[static_cast<Eigen::Index>(k)]));
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

// J_k(x) to 20 significant digits from an arbitrary-precision evaluation
struct BesselSample {
    double x;
    int k;
    double value;
};

constexpr BesselSample bessel_reference[] = {
    {0.1, 0, 0.99750156206604003228},
    {0.1, 3, 0.000020820315754756261429},
    {0.1, 6, 2.1693639603760023806e-11},
    {0.1, 9, 5.3809434916023275945e-18},
    {0.1, 12, 5.0958844202514110824e-25},
    {0.1, 15, 2.3333645478334629699e-32},
    {0.1, 18, 5.9574706795566174061e-40},
    {0.1, 21, 9.3320450718017908532e-48},
    {0.1, 24, 9.6057439153641933593e-56},
    {0.1, 27, 6.8417712500906966338e-64},
    {0.1, 30, 3.5107914446214572286e-72},
    {0.1, 33, 1.3405793418211219763e-80},
    {0.1, 36, 3.9116110358109507203e-89},
    {0.1, 39, 8.9169832090104542469e-98},
    {0.1, 40, 1.1146246002516398121e-100},
    {1.0, 0, 0.76519768655796655145},
    {1.0, 3, 0.019563353982668405919},
    {1.0, 6, 0.000020938338002389269966},
    {1.0, 9, 5.249250179911875043e-9},
    {1.0, 12, 4.9997181794484052891e-13},
    {1.0, 15, 2.2975315322103444438e-17},
    {1.0, 18, 5.8803445735957583403e-22},
    {1.0, 21, 9.2276219820966702292e-27},
    {1.0, 24, 9.5110979327124938133e-32},
    {1.0, 27, 6.781552053554111228e-37},
    {1.0, 30, 3.4828697942514829022e-42},
    {1.0, 33, 1.3308551172129219044e-47},
    {1.0, 36, 3.8855305133906468838e-53},
    {1.0, 39, 8.8619754959266088525e-59},
    {1.0, 41, 1.3513131024524449248e-62},
    {5.0, 0, -0.17759677131433830435},
    {5.0, 3, 0.36483123061366699446},
    {5.0, 6, 0.13104873178169200229},
    {5.0, 9, 0.0055202831394756875143},
    {5.0, 12, 0.000076278131660845513551},
    {5.0, 15, 4.7967432775179571658e-7},
    {5.0, 18, 1.6312443392737828915e-9},
    {5.0, 21, 3.3438199867531891546e-12},
    {5.0, 24, 4.454022162926882209e-15},
    {5.0, 27, 4.0745521411811268048e-18},
    {5.0, 30, 2.6711772782507988106e-21},
    {5.0, 33, 1.2980456526047180386e-24},
    {5.0, 36, 4.8059650374582747333e-28},
    {5.0, 39, 1.3870330171247455373e-31},
    {5.0, 42, 3.1810700854364166172e-35},
    {5.0, 45, 5.8938016032787353522e-39},
    {12.6, 0, 0.16260727174551067725},
    {12.6, 4, 0.22889611148027384414},
    {12.6, 8, -0.072643440552514094227},
    {12.6, 12, 0.23802813199938921373},
    {12.6, 16, 0.023719807760795633374},
    {12.6, 20, 0.00054960418406339422599},
    {12.6, 24, 4.7761531812426011501e-6},
    {12.6, 28, 1.9434917722903738413e-8},
    {12.6, 32, 4.2334771872207775852e-11},
    {12.6, 36, 5.4078687717737113276e-14},
    {12.6, 40, 4.3307371887854132268e-17},
    {12.6, 44, 2.2885986304431443919e-20},
    {12.6, 48, 8.3128027567726476402e-24},
    {12.6, 52, 2.1455263006058624047e-27},
    {40.0, 0, 0.0073668905842372895535},
    {40.0, 6, 0.048500114137794527629},
    {40.0, 12, -0.12697799611784806361},
    {40.0, 18, -0.10628182668507572823},
    {40.0, 24, -0.12552956537420352573},
    {40.0, 30, -0.10408594976564972693},
    {40.0, 36, 0.17581377898057558385},
    {40.0, 42, 0.066649110613474717087},
    {40.0, 48, 0.0026930192196836942082},
    {40.0, 54, 0.000030354040781177500268},
    {40.0, 60, 1.30926713829819886e-7},
    {40.0, 66, 2.5688471225275836769e-10},
    {40.0, 72, 2.566788848722402113e-13},
    {40.0, 78, 1.4164453145730190185e-16},
    {40.0, 80, 1.0295630893704009063e-17},
    {150.0, 0, -0.00077409037539429124695},
    {150.0, 15, 0.048285961362022112231},
    {150.0, 30, -0.0094074649928818192567},
    {150.0, 45, -0.058316849619571897102},
    {150.0, 60, -0.027145903685787337656},
    {150.0, 75, 0.066632623330918861743},
    {150.0, 90, -0.02649431293090740795},
    {150.0, 105, -0.052308900010408854443},
    {150.0, 120, 0.07045550047386770271},
    {150.0, 135, -0.083846995038426872625},
    {150.0, 150, 0.084185057883402849681},
    {150.0, 165, 0.00055395927752242228852},
    {150.0, 180, 1.4436660051376440459e-7},
    {150.0, 190, 1.6461964578305012856e-10},
};

TEST(Bessel, MatchesReferenceValues)
{
    for (const auto& ref : bessel_reference) {
        const auto j = bessel_j_sequence(ref.x, static_cast<int>(ref.x) + 40);
        EXPECT_NEAR(j[static_cast<std::size_t>(ref.k)], ref.value, 1e-15) << "x=" << ref.x << " k=" << ref.k;
    }
}

TEST(Bessel, AgreesWithStandardLibraryAtModerateArguments)
{
    for (double x : {0.1, 1.0, 5.0, 12.6, 40.0}) {
        const int n = static_cast<int>(x) + 40;
        const auto j = bessel_j_sequence(x, n);
        for (int k = 0; k <= n; ++k)
            ASSERT_NEAR(j[static_cast<std::size_t>(k)], std::cyl_bessel_j(static_cast<double>(k), x), 1e-14)
                << "x=" << x << " k=" << k;
    }
}

TEST(Bessel, ZeroArgument)
{
    const auto j = bessel_j_sequence(0.0, 5);
    EXPECT_EQ(j[0], 1.0);
    for (std::size_t k = 1; k < j.size(); ++k) EXPECT_EQ(j[k], 0.0);
    EXPECT_THROW(bessel_j_sequence(-1.0, 3), Error);
}

TEST(Plan, ScalarChebyshevIdentity)
{
    const auto plan = plan_step(1.0, 1.0);
    EXPECT_LE(plan.order, 25);
    // e^{-ixz} = sum c_k T_k(x) with T_k(cos t) = cos(k t)
    for (double theta : {0.0, 0.3, 1.1, 2.0, pi}) {
        const double x = std::cos(theta);
        cplx sum = 0.0;
        for (int k = 0; k <= plan.order; ++k) sum += plan.coeffs[static_cast<std::size_t>(k)] * std::cos(k * theta);
        EXPECT_LE(std::abs(sum - std::polar(1.0, -x)), 1e-14) << "x=" << x;
    }
}

TEST(Plan, ZeroStepIsIdentity)
{
    const auto plan = plan_step(3.0, 0.0);
    EXPECT_EQ(plan.coeffs[0], cplx(1.0));
    for (std::size_t k = 1; k < plan.coeffs.size(); ++k) EXPECT_LE(std::abs(plan.coeffs[k]), 1e-16);

    const auto tiny = plan_step(3.0, 1e-12);
    EXPECT_NEAR(tiny.coeffs[0].real(), 1.0, 1e-15);
    for (std::size_t k = 2; k < tiny.coeffs.size(); ++k) EXPECT_LE(std::abs(tiny.coeffs[k]), 1e-16);

    const auto h = random_handle(2, 3, 1);
    const auto psi = oracle::random_state(h.partition(), 2);
    const StateVector out = evolve(h, psi, plan_step(spectral_bound(h), 0.0));
    EXPECT_LE(max_abs_diff(out.amplitudes(), psi.amplitudes()), 1e-15);
}

TEST(Plan, OrderForDeskScaleStep)
{
    const double x = 12.6;
    const auto plan = plan_step(x / (pi / 10.0), pi / 10.0);
    EXPECT_GE(plan.order, x);
    EXPECT_LE(plan.order, x + 60);
}

TEST(Plan, TailInvariants)
{
    for (double x : {0.5, 3.0, 12.6, 40.0, 400.0}) {
        const auto plan = plan_step(x, 1.0);
        const auto j = bessel_j_sequence(x, plan.order + 200);
        EXPECT_LT(std::abs(j[static_cast<std::size_t>(plan.order)]), 1e-16);
        double tail = 0.0;
        for (std::size_t k = static_cast<std::size_t>(plan.order) + 1; k < j.size(); ++k) tail += 2.0 * std::abs(j[k]);
        EXPECT_LT(tail, 1e-14);
        EXPECT_LT(plan.tail_bound, 1e-14);
        EXPECT_GE(plan.order, std::ceil(x));
        // smallest admissible order
        EXPECT_TRUE(plan.order == static_cast<int>(std::ceil(x)) ||
                    std::abs(j[static_cast<std::size_t>(plan.order - 1)]) >= 1e-16 ||
                    2.0 * std::abs(j[static_cast<std::size_t>(plan.order)]) + tail >= 1e-14);
    }
}

TEST(Plan, CoefficientsFollowBesselFormula)
{
    const auto plan = plan_step(2.0, 1.5);
    const cplx phases[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    for (int k = 0; k <= plan.order; ++k) {
        const double jk = std::cyl_bessel_j(static_cast<double>(k), 3.0);
        const cplx expected = (k == 0 ? 1.0 : 2.0) * phases[k % 4] * jk;
        EXPECT_LE(std::abs(plan.coeffs[static_cast<std::size_t>(k)] - expected), 1e-14);
    }
}

TEST(Plan, BadArguments)
{
    EXPECT_EQ(kind_of([] { plan_step(0.0, 1.0); }), ErrorKind::BadArguments);
    EXPECT_EQ(kind_of([] { plan_step(-1.0, 1.0); }), ErrorKind::BadArguments);
    EXPECT_EQ(kind_of([] { plan_step(1.0, -1.0); }), ErrorKind::BadArguments);
    EXPECT_EQ(kind_of([] { plan_step(1.0, std::nan("")); }), ErrorKind::BadArguments);
    EXPECT_EQ(kind_of([] { plan_step(1.0, 1.0, 1e-9); }), ErrorKind::BadArguments);
    EXPECT_EQ(kind_of([] { plan_step(1.0, 1.0, 0.0); }), ErrorKind::BadArguments);
}

TEST(Evolve, PlanMismatch)
{
    const auto h = random_handle(2, 2, 4);
    const auto psi = oracle::random_state(h.partition(), 1);
    EXPECT_EQ(kind_of([&] { evolve(h, psi, plan_step(0.5 * spectral_bound(h), 0.1)); }), ErrorKind::PlanMismatch);
}

TEST(Evolve, MatchesDenseSpectralPropagation)
{
    const auto h = random_handle(2, 4, 7);
    const oracle::Matrix dense = oracle::hamiltonian(h.table(), 6);
    for (double tau : {pi / 10.0, 1.0, 7.5}) {
        const auto psi = oracle::random_state(h.partition(), 3);
        const StateVector out = evolve(h, psi, plan_step(spectral_bound(h), tau));
        EXPECT_LE(max_diff(out, oracle::propagate(dense, oracle::to_eigen(psi.amplitudes()), tau)), 1e-10)
            << "tau " << tau;
    }
}

TEST(Evolve, StepSizeIndependence)
{
    const auto h = random_handle(3, 5, 8);
    const double r = spectral_bound(h);
    const double tau = pi / 10.0;
    const auto psi = oracle::random_state(h.partition(), 5);
    const StateVector twice = evolve(h, evolve(h, psi, plan_step(r, tau)), plan_step(r, tau));
    const StateVector once = evolve(h, psi, plan_step(r, 2.0 * tau));
    EXPECT_LE(max_abs_diff(twice.amplitudes(), once.amplitudes()), 1e-10);

    const StateVector composed = evolve(h, evolve(h, psi, plan_step(r, 0.2)), plan_step(r, 0.7));
    const StateVector direct = evolve(h, psi, plan_step(r, 0.9));
    EXPECT_LE(max_abs_diff(composed.amplitudes(), direct.amplitudes()), 1e-10);
}

TEST(Evolve, Reversible)
{
    const auto h = random_handle(3, 4, 9);
    const auto plan = plan_step(spectral_bound(h), 0.8);
    const auto psi = oracle::random_state(h.partition(), 6);
    const StateVector back = evolve(h, evolve(h, psi, plan), plan.reversed());
    EXPECT_LE(max_abs_diff(back.amplitudes(), psi.amplitudes()), 1e-10);
}

TEST(Evolve, LinearInTheState)
{
    const auto h = random_handle(2, 4, 10);
    const auto plan = plan_step(spectral_bound(h), 0.5);
    const auto a = oracle::random_state(h.partition(), 1);
    const auto b = oracle::random_state(h.partition(), 2);
    StateVector sum(h.partition());
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = (a[k] + b[k]);
    const double n = sum.norm();
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] /= n;
    const StateVector es = evolve(h, sum, plan), ea = evolve(h, a, plan), eb = evolve(h, b, plan);
    for (std::size_t k = 0; k < sum.size(); ++k) ASSERT_LE(std::abs(es[k] - (ea[k] + eb[k]) / n), 1e-12);
}

TEST(Evolve, UnitarityAndEnergyOverLongRun)
{
    const auto h = random_handle(3, 5, 11);
    Propagator prop(h, plan_step(spectral_bound(h), pi / 10.0));
    StateVector psi = oracle::random_state(h.partition(), 7);
    const double e0 = energy_expectation(h, psi);
    for (int step = 0; step < 500; ++step) {
        const double drift = prop.step(psi);
        ASSERT_LE(drift, 1e-12) << "step " << step;
        if (step == 99) {
            EXPECT_LE(std::abs(energy_expectation(h, psi) - e0) / std::max(1.0, std::abs(e0)), 1e-9);
        }
    }
    EXPECT_LE(std::abs(psi.norm() - 1.0), 1e-10);
    EXPECT_LE(std::abs(energy_expectation(h, psi) - e0) / std::max(1.0, std::abs(e0)), 1e-9);
}

TEST(Evolve, EigenstateAcquiresPhase)
{
    const auto h = random_handle(2, 3, 12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(oracle::hamiltonian(h.table(), 5));
    std::vector<cplx> v(32);
    for (int r = 0; r < 32; ++r) v[static_cast<std::size_t>(r)] = es.eigenvectors()(r, 4);
    const StateVector psi(h.partition(), v);
    const double t = 2.3;
    const StateVector out = evolve(h, psi, plan_step(spectral_bound(h), t));
    const cplx expected = std::polar(1.0, -es.eigenvalues()[4] * t);
    for (std::size_t k = 0; k < v.size(); ++k) ASSERT_LE(std::abs(out[k] - expected * v[k]), 1e-12);
}
