#pragma once

#include <cmath>
#include <complex>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "hamiltonian.hpp"
#include "spinspace.hpp"
#include "vector_ops.hpp"

namespace spinbath {

/// J_0(x) .. J_n(x) for x >= 0 by downward (Miller) recurrence,
///   J_{k-1} = (2k/x) J_k - J_{k+1},
/// normalized with J_0 + 2 sum_{m>=1} J_{2m} = 1.
inline std::vector<double> bessel_j_sequence(double x, int n)
{
    if (!(x >= 0.0) || !std::isfinite(x) || n < 0)
        throw Error(ErrorKind::BadArguments, "bessel sequence needs finite x >= 0 and n >= 0");
    std::vector<double> j(static_cast<std::size_t>(n) + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
        return j;
    }

    constexpr double big = 1e250;
    constexpr double tiny = 1e-300;
    const int top = std::max(n, static_cast<int>(std::ceil(x))) + 30 +
                    static_cast<int>(std::ceil(std::sqrt(40.0 * std::max(n, static_cast<int>(std::ceil(x)) + 1))));
    const int start = top + (top % 2); // even, so the normalization sum picks it up consistently

    double next = 0.0;  // J_{k+1}
    double cur = 1e-30; // J_k, arbitrary seed
    double even_sum = 0.0;
    for (int k = start; k >= 0; --k) {
        if (k <= n) j[static_cast<std::size_t>(k)] = cur;
        if (k % 2 == 0) even_sum += (k == 0 ? cur : 2.0 * cur);
        if (k == 0) break;
        const double prev = (2.0 * k / x) * cur - next;
        next = cur;
        cur = prev;
        if (std::abs(cur) > big) {
            cur /= big;
            next /= big;
            even_sum /= big;
            for (int m = k; m <= n; ++m) {
                double& v = j[static_cast<std::size_t>(m)];
                v /= big;
                if (std::abs(v) < tiny) v = 0.0;
            }
        }
    }
    for (double& v : j) {
        v /= even_sum;
        if (std::abs(v) < tiny) v = 0.0;
    }
    return j;
}

/// Truncated expansion e^{-iH tau} = sum_k c_k T_k(H/R),
/// c_k = (2 - delta_k0) (-i)^k J_k(R tau).
struct ChebyshevPlan {
    double radius = 0.0;
    double tau = 0.0;
    int order = 0;
    std::vector<cplx> coeffs;
    double tail_bound = 0.0; ///< sum_{k>order} 2|J_k(R tau)|

    /// The plan for -tau: conjugated coefficients.
    ChebyshevPlan reversed() const
    {
        ChebyshevPlan r = *this;
        r.tau = -tau;
        for (auto& c : r.coeffs) c = std::conj(c);
        return r;
    }
};

inline constexpr double default_tail_tolerance = 1e-14;

inline ChebyshevPlan plan_step(double radius, double tau, double tol = default_tail_tolerance)
{
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw Error(ErrorKind::BadArguments, "energy radius must be positive, got " + std::to_string(radius));
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw Error(ErrorKind::BadArguments, "time step must be non-negative, got " + std::to_string(tau));
    if (!(tol > 0.0) || tol > 1e-10)
        throw Error(ErrorKind::BadArguments, "tail tolerance must lie in (0, 1e-10], got " + std::to_string(tol));

    const double x = radius * tau;
    int span = 64;
    std::vector<double> j;
    for (;;) {
        j = bessel_j_sequence(x, static_cast<int>(std::ceil(x)) + span);
        if (std::abs(j.back()) < 1e-40 || x == 0.0) break;
        span *= 2;
    }

    // tail[k] = sum_{m>k} 2|J_m|
    std::vector<double> tail(j.size(), 0.0);
    for (std::size_t k = j.size() - 1; k-- > 0;) tail[k] = tail[k + 1] + 2.0 * std::abs(j[k + 1]);

    std::size_t order = static_cast<std::size_t>(std::ceil(x));
    while (order + 1 < j.size() && (std::abs(j[order]) >= 1e-16 || tail[order] >= tol)) ++order;

    ChebyshevPlan plan;
    plan.radius = radius;
    plan.tau = tau;
    plan.order = static_cast<int>(order);
    plan.tail_bound = tail[order];
    plan.coeffs.resize(order + 1);
    const cplx minus_i{0.0, -1.0};
    cplx phase{1.0, 0.0};
    for (std::size_t k = 0; k <= order; ++k) {
        plan.coeffs[k] = (k == 0 ? 1.0 : 2.0) * phase * j[k];
        phase *= minus_i;
    }
    return plan;
}

/// Reusable Chebyshev stepper. Owns three work vectors of the full dimension,
/// so one instance per trajectory.
class Propagator {
public:
    Propagator(const HamiltonianHandle& h, ChebyshevPlan plan) : h_(&h), plan_(std::move(plan))
    {
        const double bound = spectral_bound(h);
        if (plan_.radius < bound)
            throw Error(ErrorKind::PlanMismatch, "plan radius " + std::to_string(plan_.radius) +
                                                     " below spectral bound " + std::to_string(bound));
        const std::size_t d = h.partition().dim();
        prev_.resize(d);
        cur_.resize(d);
    }

    const ChebyshevPlan& plan() const noexcept { return plan_; }

    /// psi <- e^{-iH tau} psi. Returns |norm - 1| before any renormalization.
    double step(StateVector& psi)
    {
        check_dimension(*h_, psi);
        const SpinOperator& op = h_->op();
        std::span<cplx> out = psi.amplitudes();
        const double inv_r = 1.0 / plan_.radius;

        std::copy(out.begin(), out.end(), prev_.begin());
        scale(out, plan_.coeffs[0]);
        if (plan_.order >= 1) {
            op.apply(prev_, cur_, inv_r);
            axpy(plan_.coeffs[1], cur_, out);
        }
        for (int k = 2; k <= plan_.order; ++k) {
            // phi_k = 2 (H/R) phi_{k-1} - phi_{k-2}, written over phi_{k-2}
            op.apply(cur_, prev_, 2.0 * inv_r, -1.0);
            prev_.swap(cur_);
            axpy(plan_.coeffs[static_cast<std::size_t>(k)], cur_, out);
        }

        const double nrm = norm(out);
        const double drift = std::abs(nrm - 1.0);
        if (drift > 1e-12) {
            std::clog << "spinbath: norm drift " << drift << " after Chebyshev step, renormalizing\n";
            scale(out, 1.0 / nrm);
        }
        return drift;
    }

private:
    const HamiltonianHandle* h_;
    ChebyshevPlan plan_;
    std::vector<cplx> prev_;
    std::vector<cplx> cur_;
};

/// Returns e^{-iH tau} psi for the plan's tau.
inline StateVector evolve(const HamiltonianHandle& h, const StateVector& psi, const ChebyshevPlan& plan)
{
    Propagator propagator(h, plan);
    StateVector out = psi;
    propagator.step(out);
    return out;
}

} // namespace spinbath
