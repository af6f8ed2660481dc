#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "hamiltonian.hpp"
#include "spinspace.hpp"
#include "vector_ops.hpp"

namespace spinbath {

/// Full spectrum of a small Hermitian matrix (in practice H_S).
struct SpectrumS {
    Eigen::VectorXd energies;  ///< ascending
    Eigen::MatrixXcd vectors;  ///< columns are eigenvectors
    double degeneracy_tol = 0.0;
    std::vector<std::vector<int>> classes; ///< degenerate levels, ascending energy
    std::vector<int> class_of;             ///< level index -> class index

    int dim() const noexcept { return static_cast<int>(energies.size()); }
};

/// eps_deg = 1e-9 * max(1, max|E|)
inline double degeneracy_tolerance(const Eigen::VectorXd& energies)
{
    const double scale = energies.size() ? energies.cwiseAbs().maxCoeff() : 0.0;
    return 1e-9 * std::max(1.0, scale);
}

/// Levels are chained into one class while consecutive gaps stay within tol.
inline void assign_degeneracy_classes(SpectrumS& s)
{
    s.degeneracy_tol = degeneracy_tolerance(s.energies);
    s.classes.clear();
    s.class_of.assign(static_cast<std::size_t>(s.dim()), 0);
    for (int i = 0; i < s.dim(); ++i) {
        if (i == 0 || s.energies[i] - s.energies[i - 1] > s.degeneracy_tol) s.classes.emplace_back();
        s.classes.back().push_back(i);
        s.class_of[static_cast<std::size_t>(i)] = static_cast<int>(s.classes.size()) - 1;
    }
}

/// Rotates each column so its largest-magnitude component (lowest index on
/// ties) is real and positive.
inline void fix_eigenvector_phases(Eigen::MatrixXcd& vectors)
{
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        auto col = vectors.col(c);
        const double biggest = col.cwiseAbs().maxCoeff();
        Eigen::Index pivot = 0;
        while (std::abs(col[pivot]) < biggest - 1e-12) ++pivot;
        const cplx z = col[pivot];
        col *= std::conj(z) / std::abs(z);
        col[pivot] = std::abs(z);
    }
}

inline SpectrumS eig_dense(const Eigen::MatrixXcd& m)
{
    if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
    if (m.rows() > (Eigen::Index{1} << max_dense_spins))
        throw Error(ErrorKind::TooLarge, "dense eigensolver limited to dimension " +
                                             std::to_string(1 << max_dense_spins) + ", got " +
                                             std::to_string(m.rows()));
    if (m.size() > 0) {
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * scale)
            throw Error(ErrorKind::NotHermitian, "matrix deviates from Hermitian by " + std::to_string(asym));
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "dense eigensolver failed");

    SpectrumS s;
    s.energies = solver.eigenvalues();
    s.vectors = solver.eigenvectors();
    fix_eigenvector_phases(s.vectors);
    assign_degeneracy_classes(s);
    return s;
}

/// Seeded complex-Gaussian superposition of the lowest degeneracy class.
inline std::vector<cplx> ground_superposition(const SpectrumS& s, std::uint64_t seed)
{
    const auto& ground = s.classes.front();
    std::vector<cplx> out(static_cast<std::size_t>(s.dim()), cplx{0.0, 0.0});
    if (ground.size() == 1) {
        for (int r = 0; r < s.dim(); ++r) out[static_cast<std::size_t>(r)] = s.vectors(r, ground[0]);
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int level : ground) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        const cplx w{re, im};
        for (int r = 0; r < s.dim(); ++r) out[static_cast<std::size_t>(r)] += w * s.vectors(r, level);
    }
    scale(std::span<cplx>(out), 1.0 / norm(out));
    return out;
}

/// y = H x for a Hermitian operator of the given dimension.
using ApplyOperator = std::function<void(std::span<const cplx>, std::span<cplx>)>;

struct GroundState {
    double energy = 0.0;
    std::vector<std::vector<cplx>> multiplet; ///< orthonormal ground vectors
    std::vector<cplx> state;                  ///< the returned unit vector
    int iterations = 0;
};

struct LanczosOptions {
    double tol = 1e-10;          ///< residual ||Hv - E v|| per multiplet member
    int max_iterations = 500;    ///< per eigenpair, counting every H application
    int restart_length = 120;    ///< Krylov basis size before a restart
};

namespace detail {

inline void orthogonalize(std::span<cplx> w, const std::vector<std::vector<cplx>>& against)
{
    // two passes of classical Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& v : against) axpy(-inner(v, w), v, w);
}

struct EigenPair {
    double value;
    std::vector<cplx> vector;
    int iterations;
};

/// Lowest eigenpair of H restricted to the complement of `locked`, by
/// restarted Lanczos with full reorthogonalization.
inline EigenPair lowest_eigenpair(const ApplyOperator& h, std::size_t dim,
                                  const std::vector<std::vector<cplx>>& locked, std::vector<cplx> start,
                                  const LanczosOptions& opt)
{
    const std::size_t free_dim = dim - locked.size();
    std::vector<cplx> w(dim);
    int iterations = 0;

    for (;;) {
        orthogonalize(start, locked);
        const double start_norm = norm(start);
        if (start_norm == 0.0) throw Error(ErrorKind::NoConvergence, "Lanczos start vector vanished");
        scale(std::span<cplx>(start), 1.0 / start_norm);

        std::vector<std::vector<cplx>> basis{start};
        std::vector<double> alpha, beta;
        const std::size_t limit = std::min<std::size_t>(free_dim, static_cast<std::size_t>(opt.restart_length));
        Eigen::VectorXd ritz_coeffs;
        double theta = 0.0;
        bool invariant = false;

        for (;;) {
            const auto& v = basis.back();
            h(v, w);
            ++iterations;
            orthogonalize(w, locked);
            const double a = inner(v, w).real();
            alpha.push_back(a);
            orthogonalize(w, basis);
            const double b = norm(w);

            const auto m = static_cast<Eigen::Index>(alpha.size());
            Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
            Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            theta = tri.eigenvalues()[0];
            ritz_coeffs = tri.eigenvectors().col(0);
            const double estimate = b * std::abs(ritz_coeffs[m - 1]);

            invariant = b <= 1e-14 * std::max(1.0, std::abs(theta));
            if (invariant || estimate < 0.1 * opt.tol || alpha.size() >= limit ||
                iterations >= opt.max_iterations)
                break;
            beta.push_back(b);
            scale(std::span<cplx>(w), 1.0 / b);
            basis.push_back(w);
        }

        std::vector<cplx> ritz(dim, cplx{0.0, 0.0});
        for (std::size_t j = 0; j < basis.size(); ++j) axpy(ritz_coeffs[static_cast<Eigen::Index>(j)], basis[j], ritz);
        orthogonalize(ritz, locked);
        scale(std::span<cplx>(ritz), 1.0 / norm(ritz));

        h(ritz, w);
        ++iterations;
        const double rayleigh = inner(ritz, w).real();
        axpy(-rayleigh, ritz, w);
        const double residual = norm(w);
        if (residual <= opt.tol) return {rayleigh, std::move(ritz), iterations};
        if (iterations >= opt.max_iterations)
            throw Error(ErrorKind::NoConvergence, "Lanczos residual " + std::to_string(residual) + " after " +
                                                      std::to_string(iterations) + " iterations");
        start = std::move(ritz);
    }
}

inline std::vector<cplx> gaussian_vector(std::size_t dim, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cplx> v(dim);
    for (auto& a : v) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        a = {re, im};
    }
    return v;
}

} // namespace detail

/// Ground state of a Hermitian operator. Degenerate partners are found by
/// deflated restarts; a ground multiplet of size g > 1 is returned as a
/// seeded random combination of its g members.
inline GroundState lanczos_ground(const ApplyOperator& h, std::size_t dim, double degeneracy_tol, std::uint64_t seed,
                                  const LanczosOptions& opt = {})
{
    if (dim == 0) throw Error(ErrorKind::BadArguments, "empty operator");
    GroundState out;
    std::vector<std::vector<cplx>> locked;

    auto first = detail::lowest_eigenpair(h, dim, locked, detail::gaussian_vector(dim, subseed(seed, "start-0")), opt);
    out.energy = first.value;
    out.iterations = first.iterations;
    locked.push_back(std::move(first.vector));

    while (locked.size() < dim) {
        const auto start = detail::gaussian_vector(dim, subseed(seed, "start-" + std::to_string(locked.size())));
        auto next = detail::lowest_eigenpair(h, dim, locked, start, opt);
        out.iterations += next.iterations;
        if (next.value > out.energy + degeneracy_tol) break;
        locked.push_back(std::move(next.vector));
    }
    out.multiplet = locked;

    if (locked.size() == 1) {
        out.state = locked.front();
        return out;
    }
    std::mt19937_64 rng(subseed(seed, "ground-combination"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    out.state.assign(dim, cplx{0.0, 0.0});
    for (const auto& v : locked) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        axpy(cplx{re, im}, v, out.state);
    }
    scale(std::span<cplx>(out.state), 1.0 / norm(out.state));
    return out;
}

inline GroundState lanczos_ground(const SpinOperator& op, double degeneracy_tol, std::uint64_t seed,
                                  const LanczosOptions& opt = {})
{
    return lanczos_ground([&op](std::span<const cplx> in, std::span<cplx> out) { op.apply(in, out); },
                          static_cast<std::size_t>(op.dim()), degeneracy_tol, seed, opt);
}

} // namespace spinbath
