#include "fppe/io.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "fppe/checks.hpp"

namespace fppe {

using nlohmann::ordered_json;

void ExperimentConfig::validate() const {
    domain.validate();
    evolution.validate();
    const bool has_scale = initial_data.ground_state_scaled.has_value();
    const bool has_modes = !initial_data.modes.empty();
    if (has_scale == has_modes)
        throw ConfigError("initial_data must contain exactly one of ground_state_scaled / modes");
    if (has_scale && !(*initial_data.ground_state_scaled > 0.0))
        throw ConfigError("ground_state_scaled must be positive");
    for (const auto& [idx, coeff] : initial_data.modes) {
        if (idx < 1 || idx > domain.n_modes)
            throw ConfigError("initial_data mode index outside 1..n_modes");
        if (!std::isfinite(coeff)) throw ConfigError("initial_data coefficient must be finite");
    }
    if (output.formats.empty()) throw ConfigError("output.formats must not be empty");
    for (const auto& f : output.formats)
        if (f != "csv" && f != "jsonl") throw ConfigError("output format must be csv or jsonl");
}

namespace {

void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& item : obj.items())
        if (!known.count(item.key()))
            throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
}

double get_num(const ordered_json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    return obj[key].get<double>();
}

int get_int(const ordered_json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    return obj[key].get<int>();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(root, {"domain", "initial_data", "evolution", "output", "seed"}, "config");

    ExperimentConfig cfg;
    if (root.contains("domain")) {
        const auto& d = root["domain"];
        reject_unknown_keys(d, {"L", "s", "p", "n_modes", "quad"}, "domain");
        cfg.domain.length = get_num(d, "L", cfg.domain.length);
        cfg.domain.s = get_num(d, "s", cfg.domain.s);
        cfg.domain.p = get_num(d, "p", cfg.domain.p);
        cfg.domain.n_modes = get_int(d, "n_modes", cfg.domain.n_modes);
        if (d.contains("quad")) {
            const auto& q = d["quad"];
            reject_unknown_keys(q, {"n_panels", "grading_exponent", "nodes_per_panel"},
                                "domain.quad");
            cfg.domain.quad.n_panels = get_int(q, "n_panels", cfg.domain.quad.n_panels);
            cfg.domain.quad.grading_exponent =
                get_num(q, "grading_exponent", cfg.domain.quad.grading_exponent);
            cfg.domain.quad.nodes_per_panel =
                get_int(q, "nodes_per_panel", cfg.domain.quad.nodes_per_panel);
        }
    }
    if (root.contains("initial_data")) {
        const auto& init = root["initial_data"];
        reject_unknown_keys(init, {"ground_state_scaled", "modes"}, "initial_data");
        if (init.contains("ground_state_scaled"))
            cfg.initial_data.ground_state_scaled = init["ground_state_scaled"].get<double>();
        if (init.contains("modes")) {
            if (!init["modes"].is_array()) throw ConfigError("initial_data.modes must be an array");
            for (const auto& entry : init["modes"]) {
                if (!entry.is_array() || entry.size() != 2)
                    throw ConfigError("initial_data.modes entries must be [index, coefficient]");
                cfg.initial_data.modes.emplace_back(entry[0].get<int>(), entry[1].get<double>());
            }
        }
    } else {
        cfg.initial_data.ground_state_scaled = 0.5;  // default experiment
    }
    if (root.contains("evolution")) {
        const auto& e = root["evolution"];
        reject_unknown_keys(e,
                            {"scheme", "dt_init", "dt_min", "dt_max", "energy_drift_tol", "t_end",
                             "blowup_factor", "snapshot_stride"},
                            "evolution");
        if (e.contains("scheme")) {
            const std::string s = e["scheme"].get<std::string>();
            if (s == "imex_euler")
                cfg.evolution.scheme = Scheme::imex_euler;
            else if (s == "imex_cn")
                cfg.evolution.scheme = Scheme::imex_cn;
            else
                throw ConfigError("scheme must be imex_euler or imex_cn");
        }
        cfg.evolution.dt_init = get_num(e, "dt_init", cfg.evolution.dt_init);
        cfg.evolution.dt_min = get_num(e, "dt_min", cfg.evolution.dt_min);
        cfg.evolution.dt_max = get_num(e, "dt_max", cfg.evolution.dt_max);
        cfg.evolution.energy_drift_tol =
            get_num(e, "energy_drift_tol", cfg.evolution.energy_drift_tol);
        cfg.evolution.t_end = get_num(e, "t_end", cfg.evolution.t_end);
        cfg.evolution.blowup_factor = get_num(e, "blowup_factor", cfg.evolution.blowup_factor);
        cfg.evolution.snapshot_stride =
            get_int(e, "snapshot_stride", cfg.evolution.snapshot_stride);
    }
    if (root.contains("output")) {
        const auto& o = root["output"];
        reject_unknown_keys(o, {"dir", "formats"}, "output");
        if (o.contains("dir")) cfg.output.dir = o["dir"].get<std::string>();
        if (o.contains("formats")) {
            cfg.output.formats.clear();
            for (const auto& f : o["formats"]) cfg.output.formats.push_back(f.get<std::string>());
        }
    }
    if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();

    cfg.validate();
    return cfg;
}

SpectralField realize_initial_data(const ExperimentConfig& cfg, const QuadratureRule& rule) {
    if (cfg.initial_data.ground_state_scaled) {
        GroundStateConfig gs_cfg;
        gs_cfg.seed = cfg.seed;
        const GroundState gs = ground_state(cfg.domain, rule, gs_cfg);
        if (!gs.converged)
            throw ConvergenceError("ground-state solve failed while realizing initial data");
        return SpectralField(*cfg.initial_data.ground_state_scaled * gs.field.coeffs);
    }
    SpectralField u0 = SpectralField::zero(cfg.domain.n_modes);
    for (const auto& [idx, coeff] : cfg.initial_data.modes) u0.coeffs[idx - 1] += coeff;
    return u0;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ordered_json constants_json(const WellConstants& wc) {
    ordered_json j;
    j["hardy_C_star"] = wc.hardy_C_star;
    j["embedding_C"] = wc.embedding_C;
    j["embedding_C_from_d"] = wc.embedding_C_from_d;
    j["depth_d"] = wc.depth_d;
    j["depth_d_from_C"] = wc.depth_d_from_C;
    j["alpha1"] = wc.alpha1;
    j["n_modes"] = wc.n_modes;
    j["cross_check_rel_err"] = wc.cross_check_rel_err;
    j["cross_check_tol"] = wc.cross_check_tol;
    j["ascent_ratio_tol"] = wc.ascent_ratio_tol;
    j["ground_state_residual_tol"] = wc.ground_state_residual_tol;
    j["method_hardy"] = wc.method_hardy;
    j["method_embedding"] = wc.method_embedding;
    j["method_depth"] = wc.method_depth;
    return j;
}

void put_opt(ordered_json& j, const char* key, const std::optional<double>& v) {
    if (v)
        j[key] = *v;
    else
        j[key] = "absent";
}

ordered_json report_json(const ClassificationReport& rep) {
    ordered_json j;
    j["regime"] = to_string(rep.regime);
    j["J0"] = rep.J0;
    j["I0"] = rep.I0;
    j["d"] = rep.d;
    j["two_S0"] = rep.two_S0;
    put_opt(j, "delta", rep.delta);
    put_opt(j, "kappa_statement", rep.kappa_statement);
    put_opt(j, "kappa_proof", rep.kappa_proof);
    put_opt(j, "decay_2S_rate", rep.decay_2S_rate);
    put_opt(j, "decay_J_rate_proof", rep.decay_J_rate_proof);
    put_opt(j, "decay_J_rate_statement", rep.decay_J_rate_statement);
    put_opt(j, "eta", rep.eta);
    put_opt(j, "alpha2", rep.alpha2);
    put_opt(j, "K", rep.K);
    put_opt(j, "script_J0", rep.script_J0);
    put_opt(j, "T_upper", rep.T_upper);
    put_opt(j, "T_lower", rep.T_lower);
    put_opt(j, "upper_rate_coeff", rep.upper_rate_coeff);
    put_opt(j, "upper_rate_exponent", rep.upper_rate_exponent);
    put_opt(j, "lower_rate_coeff", rep.lower_rate_coeff);
    put_opt(j, "lower_rate_exponent", rep.lower_rate_exponent);
    return j;
}

ordered_json ground_json(const GroundState& gs) {
    ordered_json j;
    j["J_value"] = gs.J_value;
    j["residual"] = gs.residual;
    j["iterations"] = gs.iterations;
    j["converged"] = gs.converged;
    j["winning_start"] = gs.winning_start;
    j["coefficients"] = std::vector<double>(gs.field.coeffs.data(),
                                            gs.field.coeffs.data() + gs.field.coeffs.size());
    return j;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << content;
    if (!out) throw std::runtime_error("write failure on " + path);
}

std::string config_echo_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["domain"] = {{"L", cfg.domain.length},
                   {"s", cfg.domain.s},
                   {"p", cfg.domain.p},
                   {"n_modes", cfg.domain.n_modes},
                   {"quad",
                    {{"n_panels", cfg.domain.quad.n_panels},
                     {"grading_exponent", cfg.domain.quad.grading_exponent},
                     {"nodes_per_panel", cfg.domain.quad.nodes_per_panel}}}};
    if (cfg.initial_data.ground_state_scaled) {
        j["initial_data"] = {{"ground_state_scaled", *cfg.initial_data.ground_state_scaled}};
    } else {
        ordered_json modes = ordered_json::array();
        for (const auto& [i, c] : cfg.initial_data.modes) modes.push_back({i, c});
        j["initial_data"] = {{"modes", modes}};
    }
    j["evolution"] = {
        {"scheme", cfg.evolution.scheme == Scheme::imex_cn ? "imex_cn" : "imex_euler"},
        {"dt_init", cfg.evolution.dt_init},
        {"dt_min", cfg.evolution.dt_min},
        {"dt_max", cfg.evolution.dt_max},
        {"energy_drift_tol", cfg.evolution.energy_drift_tol},
        {"t_end", cfg.evolution.t_end},
        {"blowup_factor", cfg.evolution.blowup_factor},
        {"snapshot_stride", cfg.evolution.snapshot_stride}};
    j["output"] = {{"dir", cfg.output.dir}, {"formats", cfg.output.formats}};
    j["seed"] = cfg.seed;
    return j.dump(2);
}

}  // namespace

std::string summary_to_json(const RunSummary& summary) {
    ordered_json j;
    j["artifact_version"] = kArtifactVersion;
    j["subcommand"] = summary.subcommand;
    j["n_modes"] = summary.n_modes;
    if (summary.constants) j["constants"] = constants_json(*summary.constants);
    if (summary.report) j["classification"] = report_json(*summary.report);
    if (summary.ground) j["ground_state"] = ground_json(*summary.ground);
    if (summary.outcome) j["outcome"] = to_string(*summary.outcome);
    if (summary.T_star)
        j["T_star"] = *summary.T_star;
    if (summary.max_energy_residual) j["max_energy_residual"] = *summary.max_energy_residual;
    j["emitted_files"] = summary.emitted_files;
    j["config"] = ordered_json::parse(summary.config_echo);
    return j.dump(2) + "\n";
}

void emit_trajectory_csv(const TrajectoryRecord& record, const std::string& path) {
    std::string out = "t,J,I,two_S,L,l2,lp,seminorm_sq,singular_mass,dt\n";
    for (size_t i = 0; i < record.snapshots.size(); ++i) {
        const auto& s = record.snapshots[i];
        const double dt_row = i < record.dt_at.size() ? record.dt_at[i] : 0.0;
        out += fmt17(s.t) + ',' + fmt17(s.J) + ',' + fmt17(s.I) + ',' + fmt17(s.two_S()) + ',' +
               fmt17(s.L) + ',' + fmt17(s.l2_norm) + ',' + fmt17(s.lp_norm) + ',' +
               fmt17(s.seminorm_sq) + ',' + fmt17(s.singular_mass) + ',' + fmt17(dt_row) + '\n';
    }
    write_text(path, out);
}

void emit_trajectory_jsonl(const TrajectoryRecord& record, const std::string& path) {
    std::string out;
    for (const auto& s : record.snapshots) {
        out += "{\"t\":" + fmt17(s.t) + ",\"J\":" + fmt17(s.J) + ",\"I\":" + fmt17(s.I) +
               ",\"two_S\":" + fmt17(s.two_S()) + ",\"L\":" + fmt17(s.L) +
               ",\"l2\":" + fmt17(s.l2_norm) + ",\"lp\":" + fmt17(s.lp_norm) +
               ",\"seminorm_sq\":" + fmt17(s.seminorm_sq) +
               ",\"singular_mass\":" + fmt17(s.singular_mass) + "}\n";
    }
    write_text(path, out);
}

int run_subcommand(const std::string& name, const ExperimentConfig& cfg,
                   const std::string& out_dir, std::ostream& log, RunSummary* summary_out) {
    const auto t_begin = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out_dir);

    RunSummary summary;
    summary.subcommand = name;
    summary.config_echo = config_echo_json(cfg);
    summary.n_modes = cfg.domain.n_modes;

    int exit_code = 0;
    const QuadratureRule rule = build_quadrature(cfg.domain);

    if (name == "verify") {
        const auto results = run_acceptance_checks(cfg.seed);
        bool all_pass = true;
        ordered_json props = ordered_json::array();
        for (const auto& r : results) {
            all_pass = all_pass && r.pass;
            log << (r.pass ? "[pass] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
            props.push_back({{"name", r.name},
                             {"pass", r.pass},
                             {"detail", r.detail},
                             {"runtime_sec", r.runtime_sec}});
        }
        ordered_json doc;
        doc["artifact_version"] = kArtifactVersion;
        doc["all_pass"] = all_pass;
        doc["properties"] = props;
        const std::string path = out_dir + "/verify.json";
        write_text(path, doc.dump(2) + "\n");
        summary.emitted_files.push_back(path);
        exit_code = all_pass ? 0 : 4;
    } else if (name == "constants" || name == "classify" || name == "ground-state" ||
               name == "simulate") {
        const WeightMatrix W = build_weight_matrix(cfg.domain, rule);

        if (name == "ground-state") {
            GroundStateConfig gs_cfg;
            gs_cfg.seed = cfg.seed;
            const GroundState gs = ground_state(cfg.domain, rule, gs_cfg);
            summary.ground = gs;
            const std::string path = out_dir + "/ground_state.json";
            write_text(path, ground_json(gs).dump(2) + "\n");
            summary.emitted_files.push_back(path);
            if (!gs.converged) {
                log << "ground-state solver did not converge (residual " << gs.residual << ")\n";
                exit_code = 3;
            }
        } else {
            WellOptions well_opts;
            well_opts.seed = cfg.seed;
            const WellConstants wc = compute_well_constants(cfg.domain, rule, W, well_opts);
            summary.constants = wc;
            if (name == "constants") {
                const std::string path = out_dir + "/constants.json";
                write_text(path, constants_json(wc).dump(2) + "\n");
                summary.emitted_files.push_back(path);
            } else {
                const SpectralField u0 = realize_initial_data(cfg, rule);
                const ClassificationReport rep = classify(u0, wc, cfg.domain, rule, W);
                summary.report = rep;
                if (name == "classify") {
                    const std::string path = out_dir + "/classification.json";
                    write_text(path, report_json(rep).dump(2) + "\n");
                    summary.emitted_files.push_back(path);
                } else {  // simulate
                    const TrajectoryRecord rec = simulate(u0, cfg.evolution, cfg.domain, rule, W);
                    summary.outcome = rec.outcome;
                    if (rec.blowup && rec.blowup->reliable) summary.T_star = rec.blowup->T_star;
                    summary.max_energy_residual = energy_residual(rec, rep.J0);
                    for (const auto& fmt : cfg.output.formats) {
                        const std::string path = out_dir + "/trajectory." + fmt;
                        if (fmt == "csv")
                            emit_trajectory_csv(rec, path);
                        else
                            emit_trajectory_jsonl(rec, path);
                        summary.emitted_files.push_back(path);
                    }
                    if (rec.outcome == Outcome::StepFailure) {
                        log << "simulation failed: " << rec.failure_reason << "\n";
                        exit_code = 3;
                    }
                }
            }
        }
        const std::string spath = out_dir + "/summary.json";
        write_text(spath, summary_to_json(summary));
        summary.emitted_files.push_back(spath);
    } else {
        throw std::invalid_argument("unknown subcommand " + name);
    }

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    log << name << " finished in " << summary.wall_seconds << " s\n";
    if (summary_out) *summary_out = summary;
    return exit_code;
}

}  // namespace fppe
