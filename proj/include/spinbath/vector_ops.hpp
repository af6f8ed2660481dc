#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>

namespace spinbath {

using cplx = std::complex<double>;

namespace detail {

// Reductions are split into a fixed number of chunks regardless of the
// thread count, so the summation order (and hence every bit of the result)
// does not depend on the parallel schedule.
inline constexpr std::size_t reduction_chunks = 64;

template <typename T, typename F>
T chunked_sum(std::size_t n, F&& term)
{
    std::array<T, reduction_chunks> partial{};
    const std::size_t chunk = (n + reduction_chunks - 1) / reduction_chunks;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(reduction_chunks); ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        T acc{};
        for (std::size_t k = lo; k < hi; ++k) acc += term(k);
        partial[static_cast<std::size_t>(c)] = acc;
    }
    T total{};
    for (const T& p : partial) total += p;
    return total;
}

} // namespace detail

/// <a|b>, conjugate-linear in the first argument.
inline cplx inner(std::span<const cplx> a, std::span<const cplx> b)
{
    return detail::chunked_sum<cplx>(a.size(), [&](std::size_t k) { return std::conj(a[k]) * b[k]; });
}

inline double norm_squared(std::span<const cplx> a)
{
    return detail::chunked_sum<double>(a.size(), [&](std::size_t k) { return std::norm(a[k]); });
}

inline double norm(std::span<const cplx> a) { return std::sqrt(norm_squared(a)); }

inline void scale(std::span<cplx> a, double factor)
{
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(a.size()); ++k) a[k] *= factor;
}

inline void scale(std::span<cplx> a, cplx factor)
{
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(a.size()); ++k) a[k] *= factor;
}

/// y += alpha * x
inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y)
{
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(x.size()); ++k) y[k] += alpha * x[k];
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

} // namespace spinbath
