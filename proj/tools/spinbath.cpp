// spinbath command-line driver: run | spectrum | ldos | fit

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include <spinbath/spinbath.hpp>

namespace {

using namespace spinbath;

constexpr int exit_parse = 2;
constexpr int exit_resource = 3;
constexpr int exit_numerical = 4;
constexpr int max_total_spins = 30;

struct ParseFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseFailure("cannot read '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunSpec load_spec(const std::string& config_path, const std::vector<std::string>& overrides)
{
    ConfigSections sections = read_config_sections(read_file(config_path));
    for (const auto& o : overrides) apply_override(sections, o);
    RunSpec spec = parse_run_spec(sections);
    if (spec.model.partition.n_total() > max_total_spins)
        throw Error(ErrorKind::TooLarge, "system + environment spins = " +
                                             std::to_string(spec.model.partition.n_total()) + " exceeds " +
                                             std::to_string(max_total_spins));
    return spec;
}

/// Output stream for a path, or stdout when the path is empty.
class Output {
public:
    Output(const std::string& path, const std::string& key)
    {
        if (path.empty()) return;
        file_.open(path);
        if (!file_) throw ParseFailure(key + ": cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

void write_couplings(const Simulation& sim)
{
    if (sim.spec.dump_couplings.empty()) return;
    Output out(sim.spec.dump_couplings, "[run] dump_couplings");
    out.stream() << sim.provenance << dump_model(sim.table);
}

void write_ldos(const Simulation& sim, const std::string& path)
{
    const LdosResult r = compute_ldos(sim.hamiltonian, sim.initial, sim.spec.ldos_steps, sim.spec.ldos_eta);
    Output out(path, "[run] ldos_out");
    out.stream() << sim.provenance;
    write_ldos_csv(out.stream(), r);
}

int cmd_run(const RunSpec& spec)
{
    const Simulation sim = prepare(spec);
    write_couplings(sim);

    TrajectoryResult result;
    {
        Output out(spec.out, "[run] out");
        auto& o = out.stream();
        o << sim.provenance;
        write_metrics_header(o, sim.spectrum.dim());
        int step = 0;
        result = run_trajectory(sim, [&](const MetricsSample& s) { write_metrics_row(o, step++, s); });
        o.flush();
    }

    const double scale = std::max(1.0, std::abs(result.initial_energy));
    std::clog << "spinbath: " << spec.steps << " steps, energy drift "
              << std::abs(result.final_energy - result.initial_energy) / scale << " (relative), max norm drift "
              << result.max_norm_drift << '\n';

    if (!spec.ldos_out.empty()) write_ldos(sim, spec.ldos_out);

    if (spec.fit) {
        const auto fits = fit_metrics(result.samples, *spec.fit);
        Output out(spec.out.empty() ? std::string() : spec.out + ".fit.csv", "[run] fit");
        out.stream() << sim.provenance;
        write_fit_report(out.stream(), fits, spec.tau);
    }
    return 0;
}

int cmd_spectrum(const RunSpec& spec)
{
    const CouplingTable table = build_model(spec.model);
    const SpectrumS s = eig_dense(build_dense(system_operator(table, spec.model.partition)));
    std::cout << provenance_header(spec, table);
    std::cout << "# degeneracy_tol = " << format_metric(s.degeneracy_tol) << '\n';
    std::cout << "level,energy,class\n";
    for (int i = 0; i < s.dim(); ++i)
        std::cout << i + 1 << ',' << format_metric(s.energies[i]) << ',' << s.class_of[static_cast<std::size_t>(i)] + 1
                  << '\n';
    std::cout << "# class,energy,degeneracy\n";
    for (std::size_t c = 0; c < s.classes.size(); ++c)
        std::cout << "# " << c + 1 << ',' << format_metric(s.energies[s.classes[c].front()]) << ','
                  << s.classes[c].size() << '\n';
    return 0;
}

int cmd_ldos(const RunSpec& spec)
{
    const Simulation sim = prepare(spec);
    write_ldos(sim, spec.ldos_out);
    return 0;
}

struct MetricsTable {
    std::string provenance;
    std::map<std::string, std::vector<double>> columns;
};

MetricsTable read_metrics_csv(const std::string& path)
{
    std::istringstream in(read_file(path));
    MetricsTable table;
    std::vector<std::string> names;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            table.provenance += line + '\n';
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
        if (names.empty()) {
            names = cells;
            continue;
        }
        if (cells.size() != names.size()) throw ParseFailure(path + ": row with " + std::to_string(cells.size()) +
                                                             " cells, header has " + std::to_string(names.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(cells[c].c_str(), &end);
            if (end == cells[c].c_str()) throw ParseFailure(path + ": bad number '" + cells[c] + "'");
            table.columns[names[c]].push_back(v);
        }
    }
    for (const char* needed : {"t", "sigma", "b", "E_S"})
        if (!table.columns.count(needed)) throw ParseFailure(path + ": missing column '" + std::string(needed) + "'");
    return table;
}

int cmd_fit(const std::string& path, const std::string& model_name, const std::vector<std::string>& series,
            std::optional<double> t_min, std::optional<double> t_max, const std::string& out_path)
{
    FitModel model;
    try {
        model = parse_fit_model(model_name);
    } catch (const Error& e) {
        throw ParseFailure(std::string("--model: ") + e.what());
    }
    const MetricsTable table = read_metrics_csv(path);
    const auto& t = table.columns.at("t");

    std::optional<FitWindow> window;
    if (t_min || t_max) {
        window = FitWindow{};
        if (t_min) window->t_lo = *t_min;
        if (t_max) window->t_hi = *t_max;
    }

    std::vector<SeriesFit> fits;
    for (const auto& name : series) {
        const auto col = table.columns.find(name);
        if (col == table.columns.end()) throw ParseFailure("--series: no column '" + name + "' in " + path);
        fits.push_back({name, fit_relaxation(t, col->second, model, window)});
    }
    const double tau = t.size() > 1 ? t[1] - t[0] : 1.0;
    Output out(out_path, "--out");
    out.stream() << table.provenance;
    write_fit_report(out.stream(), fits, tau);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Closed spin-1/2 system + bath simulator with Chebyshev propagation and thermometry"};
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> overrides;
    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("config", config, "Configuration file")->required();
        cmd->add_option("--set", overrides, "Override a config key, e.g. --set run.steps=100");
    };

    std::string out;
    auto* run = app.add_subcommand("run", "Propagate one trajectory and write the metrics table");
    add_config(run);
    run->add_option("--out", out, "Metrics CSV path (overrides [run] out)");

    auto* spectrum = app.add_subcommand("spectrum", "Print the spectrum of H_S");
    add_config(spectrum);

    auto* ldos_cmd = app.add_subcommand("ldos", "Local density of states of the initial state");
    add_config(ldos_cmd);
    ldos_cmd->add_option("--out", out, "LDOS CSV path (overrides [run] ldos_out)");

    std::string metrics_path, model_name = "exp";
    std::vector<std::string> series{"sigma", "b", "E_S"};
    std::optional<double> t_min, t_max;
    auto* fit = app.add_subcommand("fit", "Fit relaxation laws to an existing metrics CSV");
    fit->add_option("metrics", metrics_path, "Metrics CSV written by 'run'")->required();
    fit->add_option("--model", model_name, "exp or gauss")->capture_default_str();
    fit->add_option("--series", series, "Columns to fit")->delimiter(',')->capture_default_str();
    fit->add_option("--t-min", t_min, "Window start");
    fit->add_option("--t-max", t_max, "Window end");
    fit->add_option("--out", out, "Report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_parse;
    }

    try {
        if (*fit) return cmd_fit(metrics_path, model_name, series, t_min, t_max, out);

        if (*run && !out.empty()) overrides.push_back("run.out=" + out);
        if (*ldos_cmd && !out.empty()) overrides.push_back("run.ldos_out=" + out);
        const RunSpec spec = load_spec(config, overrides);
        if (*run) return cmd_run(spec);
        if (*spectrum) return cmd_spectrum(spec);
        if (*ldos_cmd) return cmd_ldos(spec);
    } catch (const ParseFailure& e) {
        std::cerr << "spinbath: " << e.what() << '\n';
        return exit_parse;
    } catch (const Error& e) {
        std::cerr << "spinbath: " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::Parse:
        case ErrorKind::BadTopology:
        case ErrorKind::InvalidKind: return exit_parse;
        case ErrorKind::OutOfRange:
        case ErrorKind::TooLarge: return exit_resource;
        default: return exit_numerical;
        }
    } catch (const std::bad_alloc&) {
        std::cerr << "spinbath: out of memory\n";
        return exit_resource;
    }
    return 0;
}
