#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace spinbath {

enum class FitModel { Exp, Gauss };

inline std::string_view to_string(FitModel m) noexcept { return m == FitModel::Exp ? "exp" : "gauss"; }

inline FitModel parse_fit_model(std::string_view text)
{
    if (text == "exp") return FitModel::Exp;
    if (text == "gauss") return FitModel::Gauss;
    throw Error(ErrorKind::Parse, "unknown fit model '" + std::string(text) + "'");
}

struct FitWindow {
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
};

/// y(t) = offset + amplitude * e^{-t/T}      (Exp)
/// y(t) = offset + amplitude * e^{-(t/T)^2}  (Gauss)
/// Times are absolute (the same units as the input t).
struct FitResult {
    FitModel model = FitModel::Exp;
    double offset = 0.0;
    double amplitude = 0.0;
    double time_constant = 0.0;
    double rms_residual = 0.0;
    FitWindow window;
    std::size_t points = 0;
    bool degenerate = false; ///< amplitude ~ 0, time constant meaningless
};

inline constexpr int fit_grid_size = 200;

/// Default window: drop non-finite samples; if the series first rises, peaks
/// in its first half and then falls back by at least a tenth of the rise,
/// start at the peak so only the decay is fitted.
inline FitWindow default_fit_window(std::span<const double> t, std::span<const double> y)
{
    std::vector<std::size_t> finite;
    for (std::size_t k = 0; k < t.size() && k < y.size(); ++k)
        if (std::isfinite(y[k])) finite.push_back(k);
    FitWindow w;
    if (finite.size() < 2) return w;
    w.t_lo = t[finite.front()];
    w.t_hi = t[finite.back()];
    if (y[finite[1]] > y[finite[0]]) {
        std::size_t peak = 0;
        for (std::size_t q = 1; q < finite.size(); ++q)
            if (y[finite[q]] > y[finite[peak]]) peak = q;
        double after = y[finite[peak]];
        for (std::size_t q = peak; q < finite.size(); ++q) after = std::min(after, y[finite[q]]);
        const double rise = y[finite[peak]] - y[finite[0]];
        const double drop = y[finite[peak]] - after;
        if (2 * peak < finite.size() && drop > 0.1 * rise) w.t_lo = t[finite[peak]];
    }
    return w;
}

namespace detail {

struct LinearFit {
    double offset;
    double amplitude;
    double rss;
};

/// Least squares for (offset, amplitude) against the basis {1, g(t)}.
inline LinearFit solve_linear(std::span<const double> t, std::span<const double> y, FitModel model, double tc,
                              double t0)
{
    const std::size_t n = t.size();
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = model == FitModel::Exp ? (t[k] - t0) / tc : t[k] / tc;
        g[k] = model == FitModel::Exp ? std::exp(-s) : std::exp(-s * s);
    }
    double gm = 0.0, ym = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        gm += g[k];
        ym += y[k];
    }
    gm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double sgg = 0.0, sgy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sgg += (g[k] - gm) * (g[k] - gm);
        sgy += (g[k] - gm) * (y[k] - ym);
    }
    const double amplitude = sgg > 1e-300 ? sgy / sgg : 0.0;
    const double offset = ym - amplitude * gm;
    double rss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = y[k] - offset - amplitude * g[k];
        rss += r * r;
    }
    return {offset, amplitude, rss};
}

} // namespace detail

/// Variable-projection fit: for each trial time constant on a 200-point log
/// grid over [dt_min, 10 * span] the linear parameters are solved exactly;
/// the best grid point is refined by golden-section search in log T.
inline FitResult fit_relaxation(std::span<const double> t_all, std::span<const double> y_all, FitModel model,
                                std::optional<FitWindow> window = std::nullopt)
{
    if (t_all.size() != y_all.size()) throw Error(ErrorKind::BadArguments, "time and value series differ in length");
    for (std::size_t k = 1; k < t_all.size(); ++k)
        if (!(t_all[k] > t_all[k - 1])) throw Error(ErrorKind::BadArguments, "times must be strictly increasing");

    const FitWindow w = window.value_or(default_fit_window(t_all, y_all));
    std::vector<double> t, y;
    for (std::size_t k = 0; k < t_all.size(); ++k)
        if (t_all[k] >= w.t_lo && t_all[k] <= w.t_hi && std::isfinite(y_all[k])) {
            t.push_back(t_all[k]);
            y.push_back(y_all[k]);
        }
    if (t.size() < 8)
        throw Error(ErrorKind::Underdetermined, "fit needs at least 8 points in the window, got " +
                                                    std::to_string(t.size()));

    const double t0 = t.front();
    const double span = t.back() - t.front();
    double dt_min = span;
    for (std::size_t k = 1; k < t.size(); ++k) dt_min = std::min(dt_min, t[k] - t[k - 1]);

    auto rss_at = [&](double log_tc) { return detail::solve_linear(t, y, model, std::exp(log_tc), t0).rss; };

    const double lo = std::log(dt_min);
    const double hi = std::log(10.0 * span);
    std::vector<double> grid(fit_grid_size), rss(fit_grid_size);
    int best = 0;
    for (int k = 0; k < fit_grid_size; ++k) {
        grid[k] = lo + (hi - lo) * k / (fit_grid_size - 1);
        rss[k] = rss_at(grid[k]);
        if (rss[k] < rss[best]) best = k;
    }

    double a = grid[std::max(best - 1, 0)];
    double b = grid[std::min(best + 1, fit_grid_size - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = rss_at(c), fd = rss_at(d);
    for (int iter = 0; iter < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a)); ++iter) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = rss_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = rss_at(d);
        }
    }
    double log_tc = 0.5 * (a + b);
    if (rss[best] < rss_at(log_tc)) log_tc = grid[best];

    const double tc = std::exp(log_tc);
    const auto lin = detail::solve_linear(t, y, model, tc, t0);

    FitResult r;
    r.model = model;
    r.offset = lin.offset;
    r.time_constant = tc;
    // the exponential basis is shifted to the window start; report A at t = 0
    r.amplitude = model == FitModel::Exp ? lin.amplitude * std::exp(t0 / tc) : lin.amplitude;
    r.rms_residual = std::sqrt(lin.rss / static_cast<double>(t.size()));
    r.window = {t.front(), t.back()};
    r.points = t.size();
    r.degenerate = std::abs(lin.amplitude) <= 1e-12;
    return r;
}

} // namespace spinbath
