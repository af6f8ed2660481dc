#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "eigensolve.hpp"
#include "error.hpp"
#include "spinspace.hpp"
#include "vector_ops.hpp"

namespace spinbath {

enum class Basis { Computational, Eigen };

struct ReducedDensityMatrix {
    Eigen::MatrixXcd matrix;
    Basis basis = Basis::Computational;

    int dim() const noexcept { return static_cast<int>(matrix.rows()); }
    cplx trace() const { return matrix.trace(); }
};

/// rho_ij = sum_p c(i,p) conj(c(j,p)), the partial trace over the environment
/// of |psi><psi|. Computed on the upper triangle and mirrored, so the result
/// is exactly Hermitian.
inline ReducedDensityMatrix reduced_density(const StateVector& psi)
{
    const auto n = static_cast<Eigen::Index>(psi.partition().dim_system());
    const auto envs = psi.partition().dim_environment();
    const auto c = psi.amplitudes();
    ReducedDensityMatrix rho{Eigen::MatrixXcd::Zero(n, n), Basis::Computational};
    auto& m = rho.matrix;
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index j = 0; j < n; ++j) {
        for (std::uint64_t p = 0; p < envs; ++p) {
            const cplx* row = c.data() + p * static_cast<std::uint64_t>(n);
            const cplx cj = std::conj(row[j]);
            for (Eigen::Index i = 0; i <= j; ++i) m(i, j) += row[i] * cj;
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        m(j, j) = m(j, j).real();
        for (Eigen::Index i = 0; i < j; ++i) m(j, i) = std::conj(m(i, j));
    }
    return rho;
}

/// U^dagger rho U with U the H_S eigenvectors.
inline ReducedDensityMatrix to_eigenbasis(const ReducedDensityMatrix& rho, const SpectrumS& spectrum)
{
    if (rho.basis != Basis::Computational)
        throw Error(ErrorKind::BasisMismatch, "density matrix is already in the eigenbasis");
    if (rho.dim() != spectrum.dim())
        throw Error(ErrorKind::BasisMismatch, "density matrix dimension " + std::to_string(rho.dim()) +
                                                  " vs spectrum dimension " + std::to_string(spectrum.dim()));
    ReducedDensityMatrix out{spectrum.vectors.adjoint() * rho.matrix * spectrum.vectors, Basis::Eigen};
    // restore exact Hermiticity lost to rounding in the two products
    Eigen::MatrixXcd sym = 0.5 * (out.matrix + out.matrix.adjoint());
    out.matrix = std::move(sym);
    return out;
}

inline constexpr double population_floor = 1e-12;

/// One sample of the thermometry metrics.
struct MetricsSample {
    double t = 0.0;
    double energy = 0.0; ///< E_S = sum_i E_i rho_ii
    double b = std::numeric_limits<double>::quiet_NaN();
    double delta = std::numeric_limits<double>::quiet_NaN();
    double sigma = 0.0;
    double mu = 0.0;
    bool b_valid = false;
    std::vector<double> populations; ///< rho_ii, ascending energy
};

/// Boltzmann populations e^{-b E_i} / Z.
inline std::vector<double> boltzmann_populations(const Eigen::VectorXd& energies, double b)
{
    std::vector<double> w(static_cast<std::size_t>(energies.size()));
    if (w.empty()) return w;
    const double ref = b >= 0.0 ? energies.minCoeff() : energies.maxCoeff();
    double z = 0.0;
    for (Eigen::Index i = 0; i < energies.size(); ++i) {
        w[static_cast<std::size_t>(i)] = std::exp(-b * (energies[i] - ref));
        z += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) v /= z;
    return w;
}

/// sigma: off-diagonal magnitude; b: mean pairwise log-population slope over
/// levels in different degeneracy classes with both populations above the
/// floor; delta: distance of the diagonal to Boltzmann at b; mu: spread of
/// populations inside each degeneracy class.
inline MetricsSample metrics(const ReducedDensityMatrix& rho, const SpectrumS& spectrum, double t)
{
    if (rho.basis != Basis::Eigen) throw Error(ErrorKind::BasisMismatch, "metrics need the H_S eigenbasis");
    if (rho.dim() != spectrum.dim())
        throw Error(ErrorKind::BasisMismatch, "density matrix and spectrum dimensions differ");

    const int n = rho.dim();
    const auto& e = spectrum.energies;
    MetricsSample s;
    s.t = t;
    s.populations.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s.populations[static_cast<std::size_t>(i)] = rho.matrix(i, i).real();
    const auto& pop = s.populations;

    double off = 0.0;
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < j; ++i) off += std::norm(rho.matrix(i, j));
    s.sigma = std::sqrt(off);

    for (int i = 0; i < n; ++i) s.energy += e[i] * pop[static_cast<std::size_t>(i)];

    double slope_sum = 0.0;
    long pairs = 0;
    for (int i = 0; i < n; ++i) {
        const double pi = pop[static_cast<std::size_t>(i)];
        if (!(pi > population_floor)) continue;
        for (int j = i + 1; j < n; ++j) {
            const double pj = pop[static_cast<std::size_t>(j)];
            if (spectrum.class_of[static_cast<std::size_t>(i)] == spectrum.class_of[static_cast<std::size_t>(j)] ||
                !(pj > population_floor))
                continue;
            slope_sum += (std::log(pi) - std::log(pj)) / (e[j] - e[i]);
            ++pairs;
        }
    }
    if (pairs > 0) {
        s.b_valid = true;
        s.b = slope_sum / static_cast<double>(pairs);
        const auto target = boltzmann_populations(e, s.b);
        double d = 0.0;
        for (int i = 0; i < n; ++i) {
            const double diff = pop[static_cast<std::size_t>(i)] - target[static_cast<std::size_t>(i)];
            d += diff * diff;
        }
        s.delta = std::sqrt(d);
    }

    double spread = 0.0;
    for (const auto& cls : spectrum.classes) {
        double mean = 0.0;
        for (int i : cls) mean += pop[static_cast<std::size_t>(i)];
        mean /= static_cast<double>(cls.size());
        for (int i : cls) {
            const double diff = pop[static_cast<std::size_t>(i)] - mean;
            spread += diff * diff;
        }
    }
    s.mu = std::sqrt(spread);
    return s;
}

/// <psi0|psi_t>
inline cplx autocorrelation(const StateVector& psi0, const StateVector& psi_t)
{
    if (psi0.partition() != psi_t.partition())
        throw Error(ErrorKind::DimensionMismatch, "autocorrelation of states with different partitions");
    return inner(psi0.amplitudes(), psi_t.amplitudes());
}

struct LdosResult {
    std::vector<double> energies; ///< cell centers spanning [-R, R]
    std::vector<double> weights;  ///< mean density over each cell; sum(weights) * cell_width = 1
    double cell_width = 0.0;
    double eta = 0.0;
};

inline constexpr double default_ldos_eta = 1.0 / 3.0;

/// LDOS from samples f_m = <psi0|e^{-iH m dt}|psi0>, m = 0..M-1.
///
/// The series is extended to negative times by f(-t) = conj(f(t)), windowed by
/// exp(-(t / (eta M dt))^2) and Fourier transformed with e^{+iEt}, so a term
/// |g_k|^2 e^{-i E_k t} yields a peak at E = E_k. Each weight is the exact
/// average of that density over its cell, taken from the antiderivative
///   F(E) = dt/(2 pi) [ f_0 E + 2 Re sum_{m>0} w_m f_m e^{iE t_m} / (i t_m) ]
/// at the cell edges, so peaks narrower than a cell are not lost.
/// The grid must not alias: R * dt <= pi.
inline LdosResult ldos(std::span<const cplx> series, double dt, double radius, double eta = default_ldos_eta,
                       int cells = 512)
{
    const std::size_t m_count = series.size();
    if (m_count < 64) throw Error(ErrorKind::BadGrid, "LDOS needs at least 64 samples, got " + std::to_string(m_count));
    if (!(dt > 0.0) || !(radius > 0.0) || !(eta > 0.0) || cells < 2)
        throw Error(ErrorKind::BadGrid, "LDOS needs dt > 0, R > 0, eta > 0 and at least 2 cells");
    if (radius * dt > std::numbers::pi)
        throw Error(ErrorKind::BadGrid, "sampling step " + std::to_string(dt) + " aliases energies up to R = " +
                                            std::to_string(radius) + " (need R*dt <= pi)");

    const double width = eta * static_cast<double>(m_count) * dt;
    std::vector<cplx> integrand(m_count);
    for (std::size_t m = 1; m < m_count; ++m) {
        const double t = static_cast<double>(m) * dt;
        integrand[m] = series[m] * std::exp(-(t / width) * (t / width)) / cplx(0.0, t);
    }

    LdosResult out;
    out.eta = eta;
    out.cell_width = 2.0 * radius / cells;
    std::vector<double> antiderivative(static_cast<std::size_t>(cells) + 1);
    for (int g = 0; g <= cells; ++g) {
        const double energy = -radius + g * out.cell_width;
        // e^{iE m dt} by rotation, resynchronized every 64 samples
        const cplx step = std::polar(1.0, energy * dt);
        cplx phase{1.0, 0.0};
        double acc = series[0].real() * energy;
        for (std::size_t m = 1; m < m_count; ++m) {
            if (m % 64 == 0) phase = std::polar(1.0, energy * dt * static_cast<double>(m));
            else phase *= step;
            acc += 2.0 * (integrand[m] * phase).real();
        }
        antiderivative[static_cast<std::size_t>(g)] = acc * dt / (2.0 * std::numbers::pi);
    }

    out.energies.resize(static_cast<std::size_t>(cells));
    out.weights.resize(static_cast<std::size_t>(cells));
    const double total = antiderivative.back() - antiderivative.front();
    if (!(total > 0.0)) throw Error(ErrorKind::BadGrid, "LDOS integrates to a non-positive value");
    for (int g = 0; g < cells; ++g) {
        const auto k = static_cast<std::size_t>(g);
        out.energies[k] = -radius + (g + 0.5) * out.cell_width;
        out.weights[k] = (antiderivative[k + 1] - antiderivative[k]) / (total * out.cell_width);
    }
    return out;
}

} // namespace spinbath
