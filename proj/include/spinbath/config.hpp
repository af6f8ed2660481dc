#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "fitting.hpp"
#include "model.hpp"
#include "spinspace.hpp"

namespace spinbath {

/// Everything that determines one trajectory and its outputs.
struct RunSpec {
    ModelSpec model;
    InitialStateKind system_initial = InitialStateKind::UD;
    InitialStateKind environment_initial = InitialStateKind::Random;
    double tau = std::numbers::pi / 10.0;
    int steps = 300;
    std::uint64_t seed = 1;

    std::string out;            ///< metrics CSV; empty = stdout
    std::string ldos_out;       ///< empty = no LDOS
    std::string dump_couplings; ///< empty = no dump
    std::optional<FitModel> fit;
    int ldos_steps = 2048;
    double ldos_eta = 1.0 / 3.0;
};

/// Per-purpose stream seeds derived from the master seed.
namespace seed_purpose {
inline constexpr std::string_view system_couplings = "system-couplings";
inline constexpr std::string_view environment_couplings = "environment-couplings";
inline constexpr std::string_view coupling_couplings = "system-environment-couplings";
inline constexpr std::string_view system_state = "system-initial-state";
inline constexpr std::string_view environment_state = "environment-initial-state";
} // namespace seed_purpose

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void config_error(const std::string& where, const std::string& what)
{
    throw Error(ErrorKind::Parse, where + ": " + what);
}

/// Real number, optionally written as a product/quotient with the constant
/// pi, e.g. "pi/10", "2*pi", "0.5".
inline double parse_real(const std::string& text, const std::string& where)
{
    if (text.empty()) config_error(where, "empty value");
    double value = 1.0;
    char op = '*';
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto next = text.find_first_of("*/", pos);
        const std::string factor = trim(text.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        double f = 0.0;
        if (factor == "pi") {
            f = std::numbers::pi;
        } else {
            char* end = nullptr;
            f = std::strtod(factor.c_str(), &end);
            if (factor.empty() || end != factor.c_str() + factor.size())
                config_error(where, "'" + text + "' is not a number");
        }
        value = op == '*' ? value * f : value / f;
        if (next == std::string::npos) break;
        op = text[next];
        pos = next + 1;
    }
    if (!std::isfinite(value)) config_error(where, "'" + text + "' is not finite");
    return value;
}

inline long long parse_integer(const std::string& text, const std::string& where)
{
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size()) config_error(where, "'" + text + "' is not an integer");
    return v;
}

inline std::uint64_t parse_seed(const std::string& text, const std::string& where)
{
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (text.empty() || text[0] == '-' || end != text.c_str() + text.size())
        config_error(where, "'" + text + "' is not a non-negative integer seed");
    return v;
}

/// "a-b,a-b,..."
inline std::vector<Bond> parse_bonds(const std::string& text, const std::string& where)
{
    std::vector<Bond> bonds;
    std::stringstream list(text);
    std::string item;
    while (std::getline(list, item, ',')) {
        item = trim(item);
        const auto dash = item.find('-');
        if (dash == std::string::npos) config_error(where, "bond '" + item + "' is not of the form a-b");
        bonds.emplace_back(static_cast<int>(parse_integer(trim(item.substr(0, dash)), where)),
                           static_cast<int>(parse_integer(trim(item.substr(dash + 1)), where)));
    }
    return bonds;
}

template <typename F>
auto wrap_parse(const std::string& where, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        config_error(where, e.what());
    }
}

} // namespace detail

/// key = value pairs by section, after comment stripping.
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

inline const std::map<std::string, std::vector<std::string>>& config_keys()
{
    static const std::map<std::string, std::vector<std::string>> keys = {
        {"system", {"n", "symmetry", "topology", "bonds", "J", "initial", "seed"}},
        {"environment", {"n", "symmetry", "topology", "bonds", "Omega", "initial", "seed"}},
        {"coupling", {"symmetry", "Delta", "seed"}},
        {"run", {"tau", "steps", "out", "ldos_out", "fit", "dump_couplings", "seed", "ldos_steps", "ldos_eta"}},
    };
    return keys;
}

/// Override of the form "section.key=value" (command-line style).
inline void apply_override(ConfigSections& sections, std::string_view assignment)
{
    const std::string text(assignment);
    const auto dot = text.find('.');
    const auto eq = text.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq)
        detail::config_error("override '" + text + "'", "expected section.key=value");
    const std::string section = detail::trim(text.substr(0, dot));
    const std::string key = detail::trim(text.substr(dot + 1, eq - dot - 1));
    const auto& keys = config_keys();
    const auto sec = keys.find(section);
    if (sec == keys.end() || std::find(sec->second.begin(), sec->second.end(), key) == sec->second.end())
        detail::config_error("override '" + text + "'", "unknown key '" + section + "." + key + "'");
    sections[section][key] = detail::trim(text.substr(eq + 1));
}

inline ConfigSections read_config_sections(std::string_view text)
{
    const auto& allowed = config_keys();
    ConfigSections sections;
    std::istringstream in{std::string(text)};
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "config line " + std::to_string(line_no);
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') detail::config_error(where, "unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!allowed.count(section)) detail::config_error(where, "unknown section [" + section + "]");
            sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) detail::config_error(where, "expected key = value");
        if (section.empty()) detail::config_error(where, "key outside any section");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const auto& keys = allowed.at(section);
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            detail::config_error(where, "unknown key '" + key + "' in [" + section + "]");
        if (sections[section].count(key)) detail::config_error(where, "duplicate key '" + key + "'");
        sections[section][key] = value;
    }
    return sections;
}

/// Builds a RunSpec from config text. Missing sector seeds are derived from
/// the master seed, so the resolved spec is always fully explicit.
inline RunSpec parse_run_spec(const ConfigSections& sections)
{
    auto get = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
        const auto s = sections.find(sec);
        if (s == sections.end()) return std::nullopt;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    };
    auto where = [](const std::string& sec, const std::string& key) { return "[" + sec + "] " + key; };

    RunSpec spec;
    if (auto v = get("run", "seed")) spec.seed = detail::parse_seed(*v, where("run", "seed"));
    if (auto v = get("run", "tau")) spec.tau = detail::parse_real(*v, where("run", "tau"));
    if (!(spec.tau > 0.0)) detail::config_error(where("run", "tau"), "must be positive");
    if (auto v = get("run", "steps")) {
        const auto steps = detail::parse_integer(*v, where("run", "steps"));
        if (steps < 0 || steps > 100000000) detail::config_error(where("run", "steps"), "out of range");
        spec.steps = static_cast<int>(steps);
    }
    if (auto v = get("run", "out")) spec.out = *v;
    if (auto v = get("run", "ldos_out")) spec.ldos_out = *v;
    if (auto v = get("run", "dump_couplings")) spec.dump_couplings = *v;
    if (auto v = get("run", "fit"); v && *v != "none")
        spec.fit = detail::wrap_parse(where("run", "fit"), [&] { return parse_fit_model(*v); });
    if (auto v = get("run", "ldos_steps")) {
        const auto m = detail::parse_integer(*v, where("run", "ldos_steps"));
        if (m < 64 || m > 10000000) detail::config_error(where("run", "ldos_steps"), "must lie in [64, 1e7]");
        spec.ldos_steps = static_cast<int>(m);
    }
    if (auto v = get("run", "ldos_eta")) spec.ldos_eta = detail::parse_real(*v, where("run", "ldos_eta"));

    auto spin_count = [&](const std::string& sec) {
        const auto v = get(sec, "n");
        if (!v) detail::config_error(where(sec, "n"), "missing");
        return static_cast<int>(detail::parse_integer(*v, where(sec, "n")));
    };
    const int ns = spin_count("system");
    const int ne = spin_count("environment");
    spec.model.partition = StatePartition(ns, ne); // OutOfRange propagates as a resource error

    auto read_sector = [&](const std::string& sec, const std::string& magnitude_key, SectorSpec& out,
                           InitialStateKind& initial, std::string_view purpose) {
        if (auto v = get(sec, "symmetry"))
            out.symmetry = detail::wrap_parse(where(sec, "symmetry"), [&] { return parse_symmetry(*v); });
        if (auto v = get(sec, "topology"))
            out.topology = detail::wrap_parse(where(sec, "topology"), [&] { return parse_topology(*v); });
        if (auto v = get(sec, "bonds")) out.bonds = detail::parse_bonds(*v, where(sec, "bonds"));
        if (auto v = get(sec, magnitude_key)) out.magnitude = detail::parse_real(*v, where(sec, magnitude_key));
        if (auto v = get(sec, "initial"))
            initial = detail::wrap_parse(where(sec, "initial"), [&] { return parse_initial_state_kind(*v); });
        out.seed = subseed(spec.seed, purpose);
        if (auto v = get(sec, "seed")) out.seed = detail::parse_seed(*v, where(sec, "seed"));
    };

    spec.model.system = {SymmetryClass::Heisenberg, Topology::Ring, std::nullopt, -1.0, 0};
    spec.model.environment = {SymmetryClass::HeisenbergType, Topology::Full, std::nullopt, 1.0, 0};
    read_sector("system", "J", spec.model.system, spec.system_initial, seed_purpose::system_couplings);
    read_sector("environment", "Omega", spec.model.environment, spec.environment_initial,
                seed_purpose::environment_couplings);

    spec.model.coupling = {SymmetryClass::HeisenbergType, 0.3, subseed(spec.seed, seed_purpose::coupling_couplings)};
    if (auto v = get("coupling", "symmetry"))
        spec.model.coupling.symmetry = detail::wrap_parse(where("coupling", "symmetry"), [&] { return parse_symmetry(*v); });
    if (auto v = get("coupling", "Delta")) spec.model.coupling.magnitude = detail::parse_real(*v, where("coupling", "Delta"));
    if (auto v = get("coupling", "seed")) spec.model.coupling.seed = detail::parse_seed(*v, where("coupling", "seed"));
    return spec;
}

inline RunSpec parse_run_spec(std::string_view text) { return parse_run_spec(read_config_sections(text)); }

/// Canonical config text of a resolved spec; parse_run_spec(to_config(s))
/// reproduces s.
inline std::string to_config(const RunSpec& s)
{
    std::ostringstream o;
    auto sector = [&](const char* name, const char* magnitude_key, const SectorSpec& sec, int n,
                      InitialStateKind initial) {
        o << '[' << name << "]\n";
        o << "n = " << n << '\n';
        o << "symmetry = " << to_string(sec.symmetry) << '\n';
        o << "topology = " << to_string(sec.topology) << '\n';
        if (sec.bonds) {
            o << "bonds = ";
            for (std::size_t k = 0; k < sec.bonds->size(); ++k)
                o << (k ? "," : "") << (*sec.bonds)[k].first << '-' << (*sec.bonds)[k].second;
            o << '\n';
        }
        o << magnitude_key << " = " << format_real(sec.magnitude) << '\n';
        o << "initial = " << to_string(initial) << '\n';
        o << "seed = " << sec.seed << '\n';
    };
    sector("system", "J", s.model.system, s.model.partition.n_system(), s.system_initial);
    sector("environment", "Omega", s.model.environment, s.model.partition.n_environment(), s.environment_initial);
    o << "[coupling]\n";
    o << "symmetry = " << to_string(s.model.coupling.symmetry) << '\n';
    o << "Delta = " << format_real(s.model.coupling.magnitude) << '\n';
    o << "seed = " << s.model.coupling.seed << '\n';
    o << "[run]\n";
    o << "tau = " << format_real(s.tau) << '\n';
    o << "steps = " << s.steps << '\n';
    o << "seed = " << s.seed << '\n';
    if (!s.out.empty()) o << "out = " << s.out << '\n';
    if (!s.ldos_out.empty()) o << "ldos_out = " << s.ldos_out << '\n';
    if (!s.dump_couplings.empty()) o << "dump_couplings = " << s.dump_couplings << '\n';
    o << "fit = " << (s.fit ? std::string(to_string(*s.fit)) : std::string("none")) << '\n';
    o << "ldos_steps = " << s.ldos_steps << '\n';
    o << "ldos_eta = " << format_real(s.ldos_eta) << '\n';
    return o.str();
}

} // namespace spinbath
