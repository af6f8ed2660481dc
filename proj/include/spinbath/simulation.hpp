#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "eigensolve.hpp"
#include "fitting.hpp"
#include "hamiltonian.hpp"
#include "model.hpp"
#include "observables.hpp"
#include "propagator.hpp"
#include "spinspace.hpp"

namespace spinbath {

/// Model, Hamiltonian, H_S spectrum and initial state of one trajectory.
struct Simulation {
    RunSpec spec;
    CouplingTable table;
    HamiltonianHandle hamiltonian;
    SpectrumS spectrum;
    StateVector initial;
    std::string provenance; ///< "# "-prefixed header lines for every output file
};

inline std::vector<cplx> initial_sector_state(const RunSpec& spec, const CouplingTable& table,
                                              const SpectrumS& system_spectrum, Subsystem which)
{
    const auto& partition = spec.model.partition;
    const InitialStateKind kind = which == Subsystem::System ? spec.system_initial : spec.environment_initial;
    const std::uint64_t seed = subseed(spec.seed, which == Subsystem::System ? seed_purpose::system_state
                                                                              : seed_purpose::environment_state);
    switch (kind) {
    case InitialStateKind::UU:
    case InitialStateKind::UD: return make_basis_state(partition, kind, which);
    case InitialStateKind::Random:
    case InitialStateKind::RR: return make_random_state(partition, kind, which, seed);
    case InitialStateKind::Ground:
        if (which == Subsystem::System) return ground_superposition(system_spectrum, seed);
        {
            const SpinOperator env = environment_operator(table, partition);
            const double tol = 1e-9 * std::max(1.0, env.bound());
            return lanczos_ground(env, tol, seed).state;
        }
    }
    throw Error(ErrorKind::InvalidKind, "unhandled initial state");
}

inline std::string provenance_header(const RunSpec& spec, const CouplingTable& table)
{
    std::ostringstream o;
    o << "# spinbath run\n";
    std::istringstream cfg(to_config(spec));
    for (std::string line; std::getline(cfg, line);) o << "# " << line << '\n';
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, fnv1a64(dump_model(table)));
    o << "# couplings_fnv1a64 = " << hash << '\n';
    return o.str();
}

inline Simulation prepare(const RunSpec& spec)
{
    CouplingTable table = build_model(spec.model);
    HamiltonianHandle h(spec.model.partition, table);
    SpectrumS spectrum = eig_dense(build_dense(system_operator(table, spec.model.partition)));
    const auto s = initial_sector_state(spec, table, spectrum, Subsystem::System);
    const auto e = initial_sector_state(spec, table, spectrum, Subsystem::Environment);
    StateVector psi = tensor_product(s, e, spec.model.partition);
    std::string header = provenance_header(spec, table);
    return Simulation{spec, std::move(table), std::move(h), std::move(spectrum), std::move(psi), std::move(header)};
}

/// Chebyshev radius for a Hamiltonian: its rigorous bound, or 1 when H = 0.
inline double propagation_radius(const HamiltonianHandle& h)
{
    const double r = spectral_bound(h);
    return r > 0.0 ? r : 1.0;
}

struct TrajectoryResult {
    std::vector<MetricsSample> samples;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    double max_norm_drift = 0.0;
    StateVector final_state{StatePartition{1, 0}};
};

/// Samples the metrics at t = m tau for m = 0..steps, evolving one step in
/// between. `on_sample` (optional) sees each sample as it is produced.
inline TrajectoryResult run_trajectory(const Simulation& sim,
                                       const std::function<void(const MetricsSample&)>& on_sample = {})
{
    TrajectoryResult out;
    Propagator propagator(sim.hamiltonian, plan_step(propagation_radius(sim.hamiltonian), sim.spec.tau));
    StateVector psi = sim.initial;
    out.initial_energy = energy_expectation(sim.hamiltonian, psi);
    for (int m = 0; m <= sim.spec.steps; ++m) {
        const auto rho = to_eigenbasis(reduced_density(psi), sim.spectrum);
        MetricsSample sample = metrics(rho, sim.spectrum, m * sim.spec.tau);
        if (on_sample) on_sample(sample);
        out.samples.push_back(std::move(sample));
        if (m < sim.spec.steps) out.max_norm_drift = std::max(out.max_norm_drift, propagator.step(psi));
    }
    out.final_energy = energy_expectation(sim.hamiltonian, psi);
    if (!std::isfinite(out.final_energy))
        throw Error(ErrorKind::NoConvergence, "trajectory produced a non-finite energy");
    out.final_state = std::move(psi);
    return out;
}

/// Autocorrelation series <psi0|e^{-iH m dt}|psi0>, dt = 0.9 pi / R, then LDOS.
inline LdosResult compute_ldos(const HamiltonianHandle& h, const StateVector& psi0, int samples, double eta,
                               int cells = 512)
{
    const double radius = propagation_radius(h);
    const double dt = 0.9 * std::numbers::pi / radius;
    Propagator propagator(h, plan_step(radius, dt));
    StateVector psi = psi0;
    std::vector<cplx> series;
    series.reserve(static_cast<std::size_t>(samples));
    for (int m = 0; m < samples; ++m) {
        series.push_back(autocorrelation(psi0, psi));
        if (m + 1 < samples) propagator.step(psi);
    }
    return ldos(series, dt, radius, eta, cells);
}

// Output writers ------------------------------------------------------------

inline std::string format_metric(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_metrics_header(std::ostream& o, int n_levels)
{
    o << "step,t,E_S,b,delta,sigma,mu";
    for (int i = 1; i <= n_levels; ++i) o << ",p_" << i;
    o << '\n';
}

inline void write_metrics_row(std::ostream& o, int step, const MetricsSample& s)
{
    o << step << ',' << format_metric(s.t) << ',' << format_metric(s.energy) << ','
      << format_metric(s.b_valid ? s.b : std::nan("")) << ',' << format_metric(s.b_valid ? s.delta : std::nan(""))
      << ',' << format_metric(s.sigma) << ',' << format_metric(s.mu);
    for (double p : s.populations) o << ',' << format_metric(p);
    o << '\n';
}

inline void write_ldos_csv(std::ostream& o, const LdosResult& r)
{
    o << "E,ldos\n";
    for (std::size_t g = 0; g < r.energies.size(); ++g)
        o << format_metric(r.energies[g]) << ',' << format_metric(r.weights[g]) << '\n';
}

struct SeriesFit {
    std::string series;
    FitResult fit;
};

inline void write_fit_report(std::ostream& o, const std::vector<SeriesFit>& fits, double tau)
{
    o << "series,model,offset,amplitude,time_constant,time_constant_over_tau,rms_residual,t_lo,t_hi,points,"
         "degenerate\n";
    for (const auto& [name, f] : fits)
        o << name << ',' << to_string(f.model) << ',' << format_metric(f.offset) << ',' << format_metric(f.amplitude)
          << ',' << format_metric(f.time_constant) << ',' << format_metric(f.time_constant / tau) << ','
          << format_metric(f.rms_residual) << ',' << format_metric(f.window.t_lo) << ','
          << format_metric(f.window.t_hi) << ',' << f.points << ',' << (f.degenerate ? 1 : 0) << '\n';
}

/// Fits sigma (T2), b and E_S (T1) of a metrics series with the given model.
/// Series that cannot be fitted (too few finite points) are skipped.
inline std::vector<SeriesFit> fit_metrics(const std::vector<double>& t, const std::vector<double>& sigma,
                                          const std::vector<double>& b, const std::vector<double>& energy,
                                          FitModel model)
{
    std::vector<SeriesFit> out;
    for (const auto& [name, y] : {std::pair<const char*, const std::vector<double>*>{"sigma", &sigma},
                                  {"b", &b},
                                  {"E_S", &energy}}) {
        try {
            out.push_back({name, fit_relaxation(t, *y, model)});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Underdetermined) throw;
        }
    }
    return out;
}

inline std::vector<SeriesFit> fit_metrics(const std::vector<MetricsSample>& samples, FitModel model)
{
    std::vector<double> t, sigma, b, energy;
    for (const auto& s : samples) {
        t.push_back(s.t);
        sigma.push_back(s.sigma);
        b.push_back(s.b_valid ? s.b : std::nan(""));
        energy.push_back(s.energy);
    }
    return fit_metrics(t, sigma, b, energy, model);
}

} // namespace spinbath
