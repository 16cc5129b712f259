// Command-line front end: structure registry, experiment configuration,
// report emission, reproducibility.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <ccgeo/diameter.hpp>
#include <ccgeo/expression.hpp>
#include <ccgeo/io.hpp>

using namespace ccgeo;
using nlohmann::json;

namespace {

Vec parse_vec(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            size_t used = 0;
            vals.push_back(std::stod(tok, &used));
            while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used])))
                ++used;
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse '" + tok + "' as a number in '" + csv + "'");
        }
    }
    if (vals.empty()) throw ConfigError("empty vector literal '" + csv + "'");
    return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

json vec_json(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

std::string timestamp_iso() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Per-run state shared by every subcommand.
struct RunContext {
    std::string structure_spec;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    bool json_out = false;
    json config;  // parsed --config document ({} when absent)

    void load_config() {
        if (config_path.empty()) {
            config = json::object();
            return;
        }
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
        try {
            in >> config;
        } catch (const json::parse_error& e) {
            throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (structure_spec.empty() && config.contains("structure"))
            structure_spec = config["structure"].get<std::string>();
        if (config.contains("seed") && seed == 1) seed = config["seed"].get<std::uint64_t>();
    }

    // Command section of the config document.
    json section(const std::string& cmd) const {
        return config.contains(cmd) ? config[cmd] : json::object();
    }

    SRStructure structure() const {
        if (structure_spec.empty())
            throw ConfigError("no structure selected (use --structure or the config file)");
        for (const auto& nm : builtin_names())
            if (nm == structure_spec) return builtin(structure_spec);
        return load_structure_file(structure_spec);
    }

    void emit(const std::string& filename, const std::string& content) const {
        if (out_dir.empty()) return;
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        atomic_write((fs::path(out_dir) / filename).string(), content);
    }

    void write_manifest(const std::string& command, const json& resolved) const {
        if (out_dir.empty()) return;
        json m;
        m["command"] = command;
        m["resolved_config"] = resolved;
        m["version"] = CCGEO_VERSION;
        m["timestamp"] = timestamp_iso();
        emit("manifest.json", m.dump(1) + "\n");
    }
};

template <typename T>
T param(const json& section, const std::string& key, T fallback) {
    return section.contains(key) ? section[key].get<T>() : fallback;
}

Vec param_vec(const json& section, const std::string& key, const std::string& cli_value,
              const Vec& fallback) {
    if (!cli_value.empty()) return parse_vec(cli_value);
    if (section.contains(key)) {
        auto v = section[key].get<std::vector<double>>();
        return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    return fallback;
}

int cmd_list_structures(const RunContext& ctx) {
    json resolved;
    resolved["json"] = ctx.json_out;
    ctx.write_manifest("list-structures", resolved);
    json rows = json::array();
    for (const auto& nm : builtin_names()) {
        auto S = builtin(nm);
        rows.push_back({{"name", nm},
                        {"n", S.n},
                        {"m", S.m},
                        {"regularity", to_string(S.regularity)}});
    }
    if (ctx.json_out) {
        std::cout << rows.dump(1) << "\n";
    } else {
        std::printf("%-18s %3s %3s  %s\n", "name", "n", "m", "regularity");
        for (const auto& r : rows)
            std::printf("%-18s %3d %3d  %s\n", r["name"].get<std::string>().c_str(),
                        r["n"].get<int>(), r["m"].get<int>(),
                        r["regularity"].get<std::string>().c_str());
    }
    ctx.emit("structures.json", rows.dump(1) + "\n");
    return 0;
}

struct ExtremalArgs {
    std::string q0, lam0;
    double T = 1.0;
    int steps = 1000;
};

int cmd_extremal(const RunContext& ctx, const ExtremalArgs& a) {
    auto S = ctx.structure();
    json sec = ctx.section("extremal");
    Vec q0 = param_vec(sec, "q0", a.q0, Vec::Zero(S.n));
    Vec lam0 = param_vec(sec, "lam0", a.lam0, Vec::Unit(S.n, 0));
    const double T = sec.contains("T") && a.T == 1.0 ? sec["T"].get<double>() : a.T;
    const int steps = sec.contains("steps") && a.steps == 1000 ? sec["steps"].get<int>() : a.steps;
    if (q0.size() != S.n || lam0.size() != S.n)
        throw ConfigError("q0/lam0 must have dimension " + std::to_string(S.n));
    if (steps <= 0) throw ConfigError("steps must be positive");

    json resolved{{"structure", ctx.structure_spec}, {"q0", vec_json(q0)},
                  {"lam0", vec_json(lam0)},          {"T", T},
                  {"steps", steps},                  {"seed", ctx.seed}};
    ctx.write_manifest("extremal", resolved);

    auto traj = integrate_extremal(S, {q0, lam0}, T, steps);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    ctx.emit("trajectory.csv", csv.str());

    json summary{{"rows", traj.states.size()},
                 {"H_drift", traj.h_drift()},
                 {"status", traj.status == TrajectoryStatus::Complete ? "complete"
                                                                      : "boundary_hit"},
                 {"final_q", vec_json(traj.back().q)},
                 {"final_lam", vec_json(traj.back().lam)}};
    ctx.emit("extremal.json", summary.dump(1) + "\n");
    if (ctx.json_out)
        std::cout << summary.dump(1) << "\n";
    else
        std::cout << "integrated " << traj.states.size() << " states, H drift "
                  << fmt17(traj.h_drift()) << " (" << summary["status"].get<std::string>()
                  << ")\n";
    return 0;
}

struct CalibrateArgs {
    std::string point;
    double eps = 0.0;
    int grid_res = 0;
    int samples = 2000;
};

int cmd_calibrate(const RunContext& ctx, const CalibrateArgs& a) {
    auto S = ctx.structure();
    json sec = ctx.section("calibrate");
    Vec p = param_vec(sec, "point", a.point, Vec::Zero(S.n));
    const double eps = a.eps > 0.0 ? a.eps : param(sec, "eps", 0.0);
    const int grid_res = a.grid_res > 0 ? a.grid_res : param(sec, "grid_res", 0);
    const int samples = a.samples != 2000 ? a.samples : param(sec, "samples", 2000);

    json resolved{{"structure", ctx.structure_spec}, {"point", vec_json(p)},
                  {"eps", eps},                      {"grid_res", grid_res},
                  {"samples", samples},              {"seed", ctx.seed}};
    ctx.write_manifest("calibrate", resolved);

    auto CF = build_calibration(S, p, eps, grid_res);
    auto rep = verify_calibration(CF, samples, ctx.seed);
    std::ostringstream os;
    save_calibration_json(CF, os);
    ctx.emit("calibration.json", os.str());

    json summary{{"eps", CF.eps},
                 {"grid_res", CF.grid_res},
                 {"ham_invariant_err", CF.ham_invariant_err},
                 {"min_abs_detDQ", CF.min_abs_detDQ},
                 {"margin_s", rep.margin_s},
                 {"unit_error", rep.unit_error}};
    ctx.emit("calibrate_report.json", summary.dump(1) + "\n");
    if (ctx.json_out)
        std::cout << summary.dump(1) << "\n";
    else
        std::cout << "calibration built: eps " << fmt17(CF.eps) << ", margin "
                  << fmt17(rep.margin_s) << ", unit error " << fmt17(rep.unit_error) << "\n";
    return 0;
}

struct QuasiArgs {
    std::string point;
    double target_eps = 0.05;
    int samples = 4000;
};

int cmd_quasi_calibrate(const RunContext& ctx, const QuasiArgs& a) {
    auto S = ctx.structure();
    json sec = ctx.section("quasi-calibrate");
    Vec p = param_vec(sec, "point", a.point, Vec::Zero(S.n));
    const double target_eps = a.target_eps != 0.05 ? a.target_eps : param(sec, "target_eps", 0.05);
    const int samples = a.samples != 4000 ? a.samples : param(sec, "samples", 4000);

    json resolved{{"structure", ctx.structure_spec}, {"point", vec_json(p)},
                  {"target_eps", target_eps},        {"samples", samples},
                  {"seed", ctx.seed}};
    ctx.write_manifest("quasi-calibrate", resolved);

    auto QC = build_quasicalibration(S, p, target_eps, samples, ctx.seed);
    std::ostringstream os;
    save_quasicalibration_json(QC, S, os);
    ctx.emit("quasicalibration.json", os.str());

    json summary{{"pivot", QC.pivot},          {"eps1", QC.eps1},
                 {"eps2", QC.eps2},            {"hbar", vec_json(QC.hbar)},
                 {"omega", vec_json(QC.omega)}, {"U_min", vec_json(QC.U.min)},
                 {"U_max", vec_json(QC.U.max)}};
    ctx.emit("quasi_report.json", summary.dump(1) + "\n");
    if (ctx.json_out)
        std::cout << summary.dump(1) << "\n";
    else
        std::cout << "quasi-calibration built: pivot " << QC.pivot << ", eps1 "
                  << fmt17(QC.eps1) << ", eps2 " << fmt17(QC.eps2) << "\n";
    return 0;
}

struct VerifyArgs {
    std::string file;
    int samples = 10000;
    double margin_tol = 1e-6;
};

int cmd_verify(const RunContext& ctx, const VerifyArgs& a) {
    json sec = ctx.section("verify");
    const std::string file = !a.file.empty() ? a.file : param<std::string>(sec, "file", "");
    const int samples = a.samples != 10000 ? a.samples : param(sec, "samples", 10000);
    const double margin_tol =
        a.margin_tol != 1e-6 ? a.margin_tol : param(sec, "margin_tol", 1e-6);
    if (file.empty()) throw ConfigError("verify needs a stored field (--file)");

    json resolved{{"file", file}, {"samples", samples}, {"margin_tol", margin_tol},
                  {"seed", ctx.seed}};
    ctx.write_manifest("verify", resolved);

    // Stored-field problems (missing, corrupt, failing invariants) are
    // verification failures (exit 1), not configuration errors.
    try {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot open '" + file + "'");
        json doc;
        try {
            in >> doc;
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("stored field is not valid JSON: ") + e.what());
        }
        const std::string type = doc.value("type", "");
        const std::string sname = doc.value("structure", "");
        auto S = [&] {
            if (!ctx.structure_spec.empty()) return ctx.structure();
            for (const auto& nm : builtin_names())
                if (nm == sname) return builtin(sname);
            throw ConfigError("stored field names unknown structure '" + sname + "'");
        }();

        json summary;
        bool pass = false;
        if (type == "calibration_field") {
            std::ifstream again(file);
            auto CF = load_calibration_json(S, again);
            auto rep = verify_calibration(CF, samples, ctx.seed);
            pass = rep.margin_s <= 1.0 + margin_tol && rep.unit_error <= margin_tol;
            summary = {{"type", type},
                       {"margin_s", rep.margin_s},
                       {"unit_error", rep.unit_error},
                       {"loop_residuals", rep.loop_residuals},
                       {"pass", pass}};
            if (!ctx.json_out)
                std::cout << "margin " << fmt17(rep.margin_s) << ", unit error "
                          << fmt17(rep.unit_error) << (pass ? " [ok]\n" : " [FAIL]\n");
        } else if (type == "quasi_calibration") {
            std::ifstream again(file);
            auto QC = load_quasicalibration_json(S, again);
            auto [e1, e2] =
                measure_quasicalibration_bounds(QC, S, QC.U, samples, ctx.seed);
            pass = e1 <= QC.eps1 + margin_tol && e2 <= QC.eps2 + margin_tol;
            summary = {{"type", type}, {"eps1", e1}, {"eps2", e2},
                       {"stored_eps1", QC.eps1}, {"stored_eps2", QC.eps2}, {"pass", pass}};
            if (!ctx.json_out)
                std::cout << "eps1 " << fmt17(e1) << ", eps2 " << fmt17(e2)
                          << (pass ? " [ok]\n" : " [FAIL]\n");
        } else {
            throw ConfigError("stored field has unknown type '" + type + "'");
        }
        if (ctx.json_out) std::cout << summary.dump(1) << "\n";
        ctx.emit("verify_report.json", summary.dump(1) + "\n");
        return pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return 1;
    }
}

struct DistanceArgs {
    std::string p, q, calibration;
    int segments = 24;
    int restarts = 6;
};

int cmd_distance(const RunContext& ctx, const DistanceArgs& a) {
    auto S = ctx.structure();
    json sec = ctx.section("distance");
    Vec p = param_vec(sec, "p", a.p, Vec::Zero(S.n));
    Vec q = param_vec(sec, "q", a.q, Vec::Zero(S.n));
    const std::string calib =
        !a.calibration.empty() ? a.calibration : param<std::string>(sec, "calibration", "");
    DistanceOptions opts;
    opts.segments = a.segments != 24 ? a.segments : param(sec, "segments", 24);
    opts.restarts = a.restarts != 6 ? a.restarts : param(sec, "restarts", 6);
    opts.seed = ctx.seed;

    json resolved{{"structure", ctx.structure_spec},
                  {"p", vec_json(p)},
                  {"q", vec_json(q)},
                  {"segments", opts.segments},
                  {"restarts", opts.restarts},
                  {"calibration", calib},
                  {"seed", ctx.seed}};
    ctx.write_manifest("distance", resolved);

    auto est = distance_upper(S, p, q, opts);
    double lower = 0.0;
    if (!calib.empty() && est.status == DistanceStatus::Finite) {
        std::ifstream in(calib);
        if (!in) throw ConfigError("cannot open calibration file '" + calib + "'");
        auto CF = load_calibration_json(S, in);
        auto rep = verify_calibration(CF, 2000, ctx.seed);
        lower = distance_lower(CF, p, q, rep.margin_s);
    }
    const std::string status = est.status == DistanceStatus::Finite ? "finite"
                               : est.status == DistanceStatus::InftySuspect
                                   ? "infty_suspect"
                                   : "infty_certified";

    json out{{"lower", lower},
             {"upper", std::isinf(est.upper) ? json() : json(est.upper)},
             {"status", status},
             {"method", est.method},
             {"feasible_restarts", est.diag.feasible_restarts},
             {"endpoint_residual", est.diag.best_endpoint_residual}};
    ctx.emit("distance.json", out.dump(1) + "\n");
    if (ctx.json_out)
        std::cout << out.dump(1) << "\n";
    else if (est.status == DistanceStatus::Finite)
        std::cout << "distance in [" << fmt17(lower) << ", " << fmt17(est.upper) << "] ("
                  << status << ")\n";
    else
        std::cout << "distance status: " << status << "\n";
    return 0;
}

struct DiameterArgs {
    std::string point, radii, regime;
    double delta_fraction = 1e-3;
    double target_eps = 0.05;
    double target_ratio = 0.0;
    int cloud_points = 5;
    bool crosscheck = false;
};

int cmd_diameter(const RunContext& ctx, const DiameterArgs& a) {
    auto S = ctx.structure();
    json sec = ctx.section("diameter");
    Vec q = param_vec(sec, "point", a.point, Vec::Zero(S.n));
    Vec radii_vec = param_vec(sec, "radii", a.radii, parse_vec("0.1,0.05,0.025"));
    std::vector<double> radii(radii_vec.data(), radii_vec.data() + radii_vec.size());
    std::string regime_str =
        !a.regime.empty() ? a.regime : param<std::string>(sec, "regime", "");
    if (regime_str.empty()) regime_str = to_string(S.regularity);
    Regularity regime;
    if (regime_str == "C11")
        regime = Regularity::C11;
    else if (regime_str == "C0")
        regime = Regularity::C0;
    else
        throw ConfigError("regime must be C11 or C0, got '" + regime_str + "'");

    SweepOptions opts;
    opts.delta_fraction =
        a.delta_fraction != 1e-3 ? a.delta_fraction : param(sec, "delta_fraction", 1e-3);
    opts.target_eps = a.target_eps != 0.05 ? a.target_eps : param(sec, "target_eps", 0.05);
    opts.cloud_points =
        a.cloud_points != 5 ? a.cloud_points : param(sec, "cloud_points", 5);
    opts.crosscheck = a.crosscheck || param(sec, "crosscheck", false);
    opts.seed = ctx.seed;
    if (!(opts.delta_fraction > 0.0 && opts.delta_fraction < 1.0))
        throw ConfigError("delta_fraction must lie in (0,1): delta must stay below r");
    double target_ratio = a.target_ratio > 0.0 ? a.target_ratio : param(sec, "target_ratio", 0.0);
    if (target_ratio <= 0.0)
        target_ratio = regime == Regularity::C11 ? 0.98 : (1.0 - opts.target_eps) * 0.98;

    json resolved{{"structure", ctx.structure_spec},
                  {"point", vec_json(q)},
                  {"radii", radii},
                  {"regime", regime_str},
                  {"delta_fraction", opts.delta_fraction},
                  {"target_eps", opts.target_eps},
                  {"target_ratio", target_ratio},
                  {"cloud_points", opts.cloud_points},
                  {"crosscheck", opts.crosscheck},
                  {"seed", ctx.seed}};
    ctx.write_manifest("diameter", resolved);

    auto sweep = diameter_sweep(S, q, radii, regime, opts);
    std::ostringstream csv;
    write_sweep_csv(csv, S.name, regime, sweep);
    ctx.emit("sweep.csv", csv.str());
    std::ostringstream js;
    write_sweep_reports_json(js, sweep);
    ctx.emit("reports.json", js.str());

    if (!ctx.json_out) {
        if (regime == Regularity::C11)
            std::cout << "margin s = " << fmt17(sweep.margin_s) << "\n";
        else
            std::cout << "slacks eps1 = " << fmt17(sweep.eps1) << ", eps2 = "
                      << fmt17(sweep.eps2) << "\n";
        for (const auto& row : sweep.rows)
            std::cout << "base " << row.base_index << " r " << fmt17(row.r) << ": ratio "
                      << fmt17(row.ratio) << "\n";
    } else {
        json out{{"margin_s", sweep.margin_s},
                 {"eps1", sweep.eps1},
                 {"eps2", sweep.eps2},
                 {"rows", json::array()}};
        for (const auto& row : sweep.rows)
            out["rows"].push_back({{"base_index", row.base_index},
                                   {"r", row.r},
                                   {"ratio", row.ratio},
                                   {"lower", row.lower},
                                   {"upper", row.upper}});
        std::cout << out.dump(1) << "\n";
    }
    for (size_t k = 0; k < sweep.rows.size(); ++k) {
        if (sweep.rows[k].ratio < target_ratio) {
            std::cerr << "row " << k << " (base " << sweep.rows[k].base_index << ", r "
                      << fmt17(sweep.rows[k].r) << ") misses the ratio target: "
                      << fmt17(sweep.rows[k].ratio) << " < " << fmt17(target_ratio) << "\n";
            return 1;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for Carnot-Caratheodory ball geometry"};
    app.require_subcommand(1);

    RunContext ctx;
    app.add_option("--structure", ctx.structure_spec,
                   "Builtin structure name or definition file");
    app.add_option("--config", ctx.config_path, "JSON configuration file");
    app.add_option("--seed", ctx.seed, "Master seed for all randomized stages");
    app.add_option("--out", ctx.out_dir, "Output directory (atomic writes)");
    app.add_flag("--json", ctx.json_out, "Machine-readable stdout");

    auto* ls = app.add_subcommand("list-structures", "List builtin structures");

    ExtremalArgs ea;
    auto* ex = app.add_subcommand("extremal", "Integrate a normal extremal");
    ex->add_option("--q0", ea.q0, "Initial point (comma-separated)");
    ex->add_option("--lam0", ea.lam0, "Initial covector (comma-separated)");
    ex->add_option("--T", ea.T, "Integration time");
    ex->add_option("--steps", ea.steps, "Number of RK4 steps");

    CalibrateArgs ca;
    auto* cal = app.add_subcommand("calibrate", "Build and store a calibration field");
    cal->add_option("--point", ca.point, "Base point (comma-separated)");
    cal->add_option("--eps", ca.eps, "Flow time half-width (0 = auto)");
    cal->add_option("--grid-res", ca.grid_res, "Seed grid nodes per axis (0 = auto)");
    cal->add_option("--samples", ca.samples, "Verification sample count");

    QuasiArgs qa;
    auto* qc = app.add_subcommand("quasi-calibrate", "Build and store a quasi-calibration");
    qc->add_option("--point", qa.point, "Base point (comma-separated)");
    qc->add_option("--target-eps", qa.target_eps, "Slack target in (0,1)");
    qc->add_option("--samples", qa.samples, "Slack-measurement sample count");

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "Re-verify a stored field");
    ver->add_option("--file", va.file, "Stored calibration / quasi-calibration JSON");
    ver->add_option("--samples", va.samples, "Verification sample count");
    ver->add_option("--margin-tol", va.margin_tol, "Margin tolerance");

    DistanceArgs da;
    auto* dist = app.add_subcommand("distance", "Distance sandwich between two points");
    dist->add_option("--p", da.p, "Start point (comma-separated)");
    dist->add_option("--q", da.q, "End point (comma-separated)");
    dist->add_option("--calibration", da.calibration,
                     "Stored calibration for the lower bound");
    dist->add_option("--segments", da.segments, "Control segments");
    dist->add_option("--restarts", da.restarts, "Optimizer restarts");

    DiameterArgs dia;
    auto* diam = app.add_subcommand("diameter", "Certified ball-diameter sweep");
    diam->add_option("--point", dia.point, "Ball center (comma-separated)");
    diam->add_option("--radii", dia.radii, "Radii (comma-separated)");
    diam->add_option("--regime", dia.regime, "C11 or C0 (default: structure regularity)");
    diam->add_option("--delta-fraction", dia.delta_fraction, "delta = r * fraction");
    diam->add_option("--target-eps", dia.target_eps, "C0 slack target");
    diam->add_option("--target-ratio", dia.target_ratio, "Acceptance ratio threshold");
    diam->add_option("--cloud-points", dia.cloud_points, "Nearby base points");
    diam->add_flag("--crosscheck", dia.crosscheck, "Optimizer/oracle cross-check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ctx.load_config();
        if (ls->parsed()) return cmd_list_structures(ctx);
        if (ex->parsed()) return cmd_extremal(ctx, ea);
        if (cal->parsed()) return cmd_calibrate(ctx, ca);
        if (qc->parsed()) return cmd_quasi_calibrate(ctx, qa);
        if (ver->parsed()) return cmd_verify(ctx, va);
        if (dist->parsed()) return cmd_distance(ctx, da);
        if (diam->parsed()) return cmd_diameter(ctx, dia);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const ccgeo::ParseError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownStructure& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
