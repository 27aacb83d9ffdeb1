#include "qcflow/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qcflow/error.hpp"
#include "qcflow/flow.hpp"
#include "qcflow/io.hpp"
#include "qcflow/quasipolar.hpp"
#include "qcflow/variation.hpp"
#include "qcflow/verify.hpp"

namespace qcflow::cli {

namespace {

using nlohmann::json;

const char* const kCommands[] = {"trace", "quasipolar", "variation", "verify", "eval"};
const char* const kDescriptions[] = {
    "Integrate a trajectory over --t, or across the --window annulus",
    "Quasipolar angle and integrating factor on an n x n polar grid",
    "p-variation of the field along an arc",
    "Run the invariant checks and report them as JSON",
    "Evaluate the field at --x0",
};

[[noreturn]] void config_error(const std::string& msg) { throw QcError(ErrorCode::ConfigParse, msg); }

double strict_double(const std::string& s, const std::string& flag) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        config_error(flag + ": '" + s + "' is not a number");
    return v;
}

/// "a,b" -> [a, b].
json number_pair(const std::string& text, const std::string& flag) {
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos)
        config_error(flag + " expects two comma-separated numbers");
    return json::array({strict_double(text.substr(0, comma), flag), strict_double(text.substr(comma + 1), flag)});
}

std::pair<double, double> get_pair(const RunConfig& cfg, const char* key, std::pair<double, double> fallback) {
    if (!cfg.params.contains(key)) return fallback;
    const json& v = cfg.params.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        config_error(std::string("params.") + key + " must be a pair of numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

double get_number(const RunConfig& cfg, const char* key, double fallback) {
    if (!cfg.params.contains(key)) return fallback;
    const json& v = cfg.params.at(key);
    if (!v.is_number()) config_error(std::string("params.") + key + " must be a number");
    return v.get<double>();
}

std::string get_string(const RunConfig& cfg, const char* key, const std::string& fallback) {
    if (!cfg.params.contains(key)) return fallback;
    const json& v = cfg.params.at(key);
    if (!v.is_string()) config_error(std::string("params.") + key + " must be a string");
    return v.get<std::string>();
}

/// Checks every parameter up front so that a bad value never leaves a file behind.
void validate(const RunConfig& cfg) {
    bool known = false;
    for (const char* c : kCommands) known = known || cfg.command == c;
    if (!known) config_error("unknown command '" + cfg.command + "'");
    if (!cfg.field && !cfg.all_builtin) config_error("--field is required");
    if (cfg.all_builtin && cfg.command != "verify") config_error("all-builtin is only valid for verify");
    get_pair(cfg, "x0", {1.0, 0.0});
    const auto t = get_pair(cfg, "t", {0.0, 1.0});
    if (t.first == t.second) config_error("--t needs a nondegenerate span");
    const auto w = get_pair(cfg, "window", {0.5, 2.0});
    if (!(w.second > w.first) || w.first < 0.0) config_error("--window needs 0 <= r < R");
    const double grid = get_number(cfg, "grid", 16);
    if (!(grid >= 1) || grid != std::floor(grid) || grid > 4096) config_error("--grid must be a positive integer");
    if (!(get_number(cfg, "p", 2.0) >= 1.0)) config_error("--p must be at least 1");
    const std::string fmt = get_string(cfg, "format", "");
    if (!fmt.empty() && fmt != "csv" && fmt != "svg" && fmt != "json") config_error("--format must be csv, svg or json");
    get_string(cfg, "arc", "");
    get_string(cfg, "svg", "");
}

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
    if (cfg.output_path.empty() || cfg.output_path == "-")
        out << content;
    else
        io::write_file_atomic(cfg.output_path, content);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json point_json(ComplexPoint z) { return json::array({z.real(), z.imag()}); }

int cmd_trace(const RunConfig& cfg, std::ostream& out) {
    const FieldDescriptor& f = *cfg.field;
    const auto [re, im] = get_pair(cfg, "x0", {1.0, 0.0});
    const ComplexPoint x0(re, im);
    const double tol = default_tolerance();
    Trajectory traj;
    std::optional<AnnulusWindow> view;
    if (!cfg.params.contains("t") && cfg.params.contains("window")) {
        const auto [r, R] = get_pair(cfg, "window", {0.5, 2.0});
        view = AnnulusWindow(r, R);
        traj = extend_to_annulus(f, x0, *view, tol).trajectory;
    } else {
        SolverOptions o;
        o.tolerance = tol;
        traj = integrate(f, x0, get_pair(cfg, "t", {0.0, 1.0}), o);
    }
    if (!view) {
        double rmax = 1.0;
        for (const auto& s : traj.samples) rmax = std::max(rmax, std::abs(s.x));
        view = AnnulusWindow(rmax * 1e-3, rmax * 1.1);
    }
    const std::string fmt = get_string(cfg, "format", "csv");
    std::string body;
    if (fmt == "csv") {
        body = io::trajectory_csv(traj);
    } else if (fmt == "svg") {
        body = io::phase_portrait_svg(std::span<const Trajectory>(&traj, 1), *view);
    } else {
        json samples = json::array(), events = json::array();
        for (const auto& s : traj.samples) samples.push_back({s.t, s.x.real(), s.x.imag()});
        for (const auto& e : traj.solver_meta.events) events.push_back({{"name", e.name}, {"t", e.t}});
        body = dump({{"field", to_json(f)}, {"samples", samples}, {"events", events}});
    }
    const std::string svg_path = get_string(cfg, "svg", "");
    const std::string svg = svg_path.empty() ? "" : io::phase_portrait_svg(std::span<const Trajectory>(&traj, 1), *view);
    emit(cfg, body, out);
    if (!svg_path.empty()) io::write_file_atomic(svg_path, svg);
    return kExitOk;
}

int cmd_quasipolar(const RunConfig& cfg, std::ostream& out) {
    const FieldDescriptor& f = *cfg.field;
    const auto [r, R] = get_pair(cfg, "window", {0.5, 2.0});
    if (r < 1e-6) throw QcError(ErrorCode::OriginTooClose, "grid reaches the critical point at the origin");
    const AnnulusWindow window(r, R);
    const auto n = static_cast<std::size_t>(get_number(cfg, "grid", 16));
    const double tol = default_tolerance();
    const std::string fmt = get_string(cfg, "format", "csv");
    const std::string svg_path = get_string(cfg, "svg", "");
    // Everything is computed before anything is written.
    std::string body, svg;
    const bool need_svg = fmt == "svg" || !svg_path.empty();
    if (need_svg) svg = io::rectification_svg(f, window, std::max<std::size_t>(n, 4), tol);
    if (fmt == "svg") {
        body = svg;
    } else {
        const auto rows = quasipolar_grid(f, window, n, tol);
        if (fmt == "json") {
            json list = json::array();
            for (const auto& row : rows)
                list.push_back({{"re", row.z.real()}, {"im", row.z.imag()}, {"rho", row.rho}, {"theta", row.theta},
                                {"lambda_factor", row.lambda_factor}});
            body = dump({{"field", to_json(f)}, {"rows", list}});
        } else {
            body = io::grid_csv(rows);
        }
    }
    emit(cfg, body, out);
    if (!svg_path.empty()) io::write_file_atomic(svg_path, svg);
    return kExitOk;
}

int cmd_variation(const RunConfig& cfg, std::ostream& out) {
    const FieldDescriptor& f = *cfg.field;
    const double p = get_number(cfg, "p", 2.0);
    const std::string arc_path = get_string(cfg, "arc", "");
    Trajectory traj;
    if (!arc_path.empty()) {
        traj = io::parse_trajectory_csv(io::read_file(arc_path));
    } else {
        const auto [re, im] = get_pair(cfg, "x0", {1.0, 0.0});
        const auto [a, b] = get_pair(cfg, "t", {0.0, 1.0});
        SolverOptions o;
        o.tolerance = default_tolerance();
        for (int i = 0; i <= 200; ++i) o.output_times.push_back(a + (b - a) * i / 200.0);
        traj = integrate(f, ComplexPoint(re, im), {a, b}, o);
    }
    const SampledArc arc = SampledArc::from_trajectory(traj);
    json report{{"field", to_json(f)}, {"samples", arc.points.size()}};
    report["p_variation"] = io::to_json(p_variation(f, arc, p));
    report["total_variation"] = p_variation(f, arc, 1.0).value;
    if (cfg.params.contains("window")) {
        const auto [r, R] = get_pair(cfg, "window", {0.5, 2.0});
        report["quadratic_bound"] = io::to_json(quadratic_bound_report(f, arc, AnnulusWindow(r, R)));
    }
    emit(cfg, dump(report), out);
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
    const auto [re, im] = get_pair(cfg, "x0", {1.0, 0.0});
    const ComplexPoint z(re, im);
    emit(cfg, dump({{"field", to_json(*cfg.field)}, {"z", point_json(z)}, {"f", point_json(eval(*cfg.field, z))}}),
         out);
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    VerifyReport report;
    const double tol = default_tolerance();
    if (cfg.all_builtin) {
        std::uint64_t i = 0;
        for (const auto& f : builtin_fields()) verify_field(f, cfg.seed + 1000 * i++, tol, report);
    } else {
        verify_field(*cfg.field, cfg.seed, tol, report);
    }
    verify_common(cfg.seed, report);
    json j = report.to_json();
    j["seed"] = cfg.seed;
    emit(cfg, dump(j), out);
    return report.ok() ? kExitOk : kExitCheckFailed;
}

}  // namespace

json to_json(const RunConfig& cfg) {
    json j{{"command", cfg.command}, {"params", cfg.params}, {"seed", cfg.seed}, {"output_path", cfg.output_path}};
    j["field"] = cfg.all_builtin ? json("all-builtin") : cfg.field ? qcflow::to_json(*cfg.field) : json(nullptr);
    return j;
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) config_error("config must be a JSON object");
    RunConfig cfg;
    if (!j.contains("command") || !j["command"].is_string()) config_error("config needs a string 'command'");
    cfg.command = j["command"].get<std::string>();
    if (j.contains("field") && !j["field"].is_null()) {
        const json& f = j["field"];
        if (f.is_string() && f.get<std::string>() == "all-builtin")
            cfg.all_builtin = true;
        else
            cfg.field = f.is_string() ? parse_field(f.get<std::string>()) : field_from_json(f);
    }
    if (j.contains("params")) {
        if (!j["params"].is_object()) config_error("'params' must be an object");
        cfg.params = j["params"];
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) config_error("'seed' must be a nonnegative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output_path")) {
        if (!j["output_path"].is_string()) config_error("'output_path' must be a string");
        cfg.output_path = j["output_path"].get<std::string>();
    }
    validate(cfg);
    return cfg;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        validate(cfg);
    } catch (const QcError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        if (cfg.command == "trace") return cmd_trace(cfg, out);
        if (cfg.command == "quasipolar") return cmd_quasipolar(cfg, out);
        if (cfg.command == "variation") return cmd_variation(cfg, out);
        if (cfg.command == "eval") return cmd_eval(cfg, out);
        return cmd_verify(cfg, out);
    } catch (const QcError& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::ConfigParse ? kExitConfig : kExitSolver;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Trajectories, quasipolar coordinates and variation checks for planar monotone vector fields",
                 "qcflow"};
    app.set_help_all_flag("--help-all");
    std::string config_path;
    app.add_option("--config", config_path, "Run a RunConfig JSON file instead of flags");

    struct Flags {
        std::string field, x0, t, window, out, format, arc, svg;
        std::optional<std::size_t> grid;
        std::optional<std::uint64_t> seed;
        std::optional<double> p;
    } flags;
    for (std::size_t c = 0; c < std::size(kCommands); ++c) {
        CLI::App* sub = app.add_subcommand(kCommands[c], kDescriptions[c]);
        sub->add_option("--field", flags.field, "JSON descriptor or shorthand (linear:1,2, example2, all-builtin)");
        sub->add_option("--x0", flags.x0, "Start or evaluation point re,im");
        sub->add_option("--t", flags.t, "Time span a,b");
        sub->add_option("--window", flags.window, "Annulus r,R");
        sub->add_option("--grid", flags.grid, "Grid size n");
        sub->add_option("--seed", flags.seed, "Seed for sampled checks");
        sub->add_option("--out", flags.out, "Output file (stdout if absent)");
        sub->add_option("--format", flags.format, "csv, svg or json");
        sub->add_option("--p", flags.p, "Variation exponent p >= 1");
        sub->add_option("--arc", flags.arc, "Arc CSV (t,re,im) for variation");
        sub->add_option("--svg", flags.svg, "Also write an SVG picture here");
    }
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) {
            if (!app.get_subcommands().empty()) config_error("--config cannot be combined with a command");
            json j;
            try {
                j = json::parse(io::read_file(config_path));
            } catch (const json::exception& e) {
                config_error(std::string("config file: ") + e.what());
            }
            cfg = run_config_from_json(j);
        } else {
            if (app.get_subcommands().empty()) {
                out << app.help();
                return kExitConfig;
            }
            cfg.command = app.get_subcommands().front()->get_name();
            if (flags.field == "all-builtin")
                cfg.all_builtin = true;
            else if (!flags.field.empty())
                cfg.field = parse_field(flags.field);
            if (!flags.x0.empty()) cfg.params["x0"] = number_pair(flags.x0, "--x0");
            if (!flags.t.empty()) cfg.params["t"] = number_pair(flags.t, "--t");
            if (!flags.window.empty()) cfg.params["window"] = number_pair(flags.window, "--window");
            if (flags.grid) cfg.params["grid"] = *flags.grid;
            if (flags.p) cfg.params["p"] = *flags.p;
            if (!flags.format.empty()) cfg.params["format"] = flags.format;
            if (!flags.arc.empty()) cfg.params["arc"] = flags.arc;
            if (!flags.svg.empty()) cfg.params["svg"] = flags.svg;
            if (flags.seed) cfg.seed = *flags.seed;
            cfg.output_path = flags.out;
            validate(cfg);
        }
    } catch (const QcError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return execute(cfg, out, err);
}

}  // namespace qcflow::cli
