#include "ilcmbk/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ilcmbk/convergence.hpp"

namespace ilcmbk {

namespace {

// 17 significant digits round-trip doubles exactly.
std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string metric_label(const std::string& channel, const char* base) {
    return std::string(base) + "_" + channel;
}

}  // namespace

Method method_from_string(const std::string& name) {
    if (name == "ilc_mbk") return Method::ilc_mbk;
    if (name == "mfac") return Method::mfac;
    if (name == "admittance") return Method::admittance;
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected ilc_mbk, mfac or admittance)");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::ilc_mbk: return "ilc_mbk";
        case Method::mfac: return "mfac";
        case Method::admittance: return "admittance";
    }
    throw std::logic_error("unreachable method");
}

ExperimentConfig experiment_from_config(const ConfigTree& cfg) {
    ExperimentConfig ec;
    ec.task = cfg.get_string("task", ec.task);
    if (cfg.has("plant_file")) ec.plant_file = cfg.get_string("plant_file");
    ec.method = method_from_string(cfg.get_string("method", "ilc_mbk"));
    ec.dt = cfg.get_double("dt", ec.dt);
    ec.iterations = cfg.get_size("iterations", ec.iterations);
    ec.seed = cfg.get_u64("seed", ec.seed);
    if (cfg.has("out")) ec.out_dir = cfg.get_string("out");
    if (cfg.has("init_dv")) ec.init_dv = cfg.get_double("init_dv");
    ec.init_dx = cfg.get_double("init_dx", ec.init_dx);
    ec.inconsistency = cfg.get_double("inconsistent", ec.inconsistency);
    ec.use_true_c = cfg.get_bool("true_c", ec.use_true_c);
    if (cfg.has("depth")) ec.depth = cfg.get_double("depth");
    if (cfg.has("t_end")) ec.t_end = cfg.get_double("t_end");

    ec.learn.alpha = cfg.get_double("learn.alpha", ec.learn.alpha);
    ec.learn.clamp_limit = cfg.get_double("learn.clamp_limit", ec.learn.clamp_limit);
    ec.learn.mu = cfg.get_double("learn.mu", ec.learn.mu);
    ec.learn.eta = cfg.get_double("learn.eta", ec.learn.eta);

    ec.mfac.rho = cfg.get_double("mfac.rho", ec.mfac.rho);
    ec.mfac.lambda = cfg.get_double("mfac.lambda", ec.mfac.lambda);
    ec.mfac.eta_phi = cfg.get_double("mfac.eta_phi", ec.mfac.eta_phi);
    ec.mfac.mu_phi = cfg.get_double("mfac.mu_phi", ec.mfac.mu_phi);
    ec.mfac.phi0_scale = cfg.get_double("mfac.phi0", ec.mfac.phi0_scale);
    ec.mfac.reset_threshold = cfg.get_double("mfac.reset_threshold", ec.mfac.reset_threshold);
    ec.mfac.u3_floor = cfg.get_double("mfac.u3_floor", ec.mfac.u3_floor);

    if (!(ec.dt > 0.0)) throw std::runtime_error("experiment: dt must be positive");
    if (ec.iterations < 1) throw std::runtime_error("experiment: iterations must be at least 1");
    return ec;
}

double rmse(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("rmse: empty input");
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return std::sqrt(acc / static_cast<double>(values.size()));
}

double mdr(std::span<const double> rmse_curve) {
    if (rmse_curve.size() < 2) throw std::invalid_argument("mdr: need at least two points");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < rmse_curve.size(); ++k) {
        best = std::max(best, rmse_curve[k] - rmse_curve[k + 1]);
    }
    return best;
}

std::filesystem::path default_out_root() {
    if (const char* root = std::getenv("ILCMBK_OUT_ROOT"); root != nullptr && *root != '\0') {
        return root;
    }
    return "results";
}

namespace {

struct ResolvedSetup {
    Preset plant;
    ReferenceTrajectory ref;
    StateError s0;
};

ResolvedSetup resolve_setup(const ExperimentConfig& cfg) {
    ResolvedSetup setup;
    setup.plant = cfg.plant_file ? load_plant(*cfg.plant_file) : preset(cfg.task);
    const double depth = cfg.depth.value_or(setup.plant.depth);
    const double t_end = cfg.t_end.value_or(setup.plant.t_end);
    setup.ref = make_reference(setup.plant.env, depth, t_end, cfg.dt);
    if (cfg.inconsistency != 0.0) {
        setup.ref = perturb_force_reference(std::move(setup.ref), cfg.inconsistency, cfg.seed);
    }

    double dv = cfg.init_dv;
    if (std::isnan(dv)) {
        double peak = 0.0;
        for (const auto& s : setup.ref.samples) peak = std::max(peak, std::abs(s[0]));
        dv = 0.1 * peak;
    }
    setup.s0 = {dv, cfg.init_dx};
    return setup;
}

void write_csv(const std::filesystem::path& path, const LearningCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "iteration,rmse_position,rmse_force,e_inf,cert_norm_gm\n";
    for (std::size_t k = 0; k < curve.iterations.size(); ++k) {
        const IterationMetrics& m = curve.iterations[k];
        out << k << ',' << fmt17(m.rmse_position) << ',' << fmt17(m.rmse_force) << ','
            << fmt17(m.e_inf) << ',' << fmt17(m.cert_norm_gm) << '\n';
    }
}

nlohmann::json summary_json(const ExperimentConfig& cfg, const ResolvedSetup& setup,
                            const LearningCurve& curve,
                            const std::optional<Certificate>& cert) {
    std::vector<double> pos, force;
    pos.reserve(curve.iterations.size());
    force.reserve(curve.iterations.size());
    for (const IterationMetrics& m : curve.iterations) {
        pos.push_back(m.rmse_position);
        force.push_back(m.rmse_force);
    }
    const std::string& channel = setup.plant.channel;

    nlohmann::json j;
    j["task"] = setup.plant.name;
    j["method"] = to_string(cfg.method);
    j["dt"] = cfg.dt;
    j["iterations"] = cfg.iterations;
    j["seed"] = cfg.seed;
    j["channel"] = channel;
    j["init_dv"] = setup.s0[0];
    j["init_dx"] = setup.s0[1];
    j["rmse_position"] = pos.back();
    j[metric_label(channel, "rmse")] = force.back();
    j["mdr_position"] = curve.iterations.size() > 1 ? mdr(pos) : 0.0;
    j[metric_label(channel, "mdr")] = curve.iterations.size() > 1 ? mdr(force) : 0.0;
    j["e_inf"] = curve.iterations.back().e_inf;
    if (cert) {
        j["certificate"] = "certificate.json";
        j["cert_norm_gm"] = cert->norm_Gm;
        j["cert_passes"] = cert->passes;
    } else {
        j["certificate"] = nullptr;
    }
    return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const ResolvedSetup setup = resolve_setup(cfg);

    ExperimentResult result;
    result.channel = setup.plant.channel;
    std::optional<Certificate> cert;

    switch (cfg.method) {
        case Method::ilc_mbk: {
            LearnConfig lc = cfg.learn;
            lc.iterations = cfg.iterations;
            lc.seed = cfg.seed;
            LearnOptions opts;
            opts.s0 = setup.s0;
            opts.use_true_c = cfg.use_true_c;
            LearnResult lr = run_learning(lc, setup.plant.env, setup.ref, setup.plant.params, opts);
            result.curve = std::move(lr.curve);
            cert = lr.final_certificate;
            break;
        }
        case Method::mfac: {
            result.curve = run_mfac_ilc(cfg.mfac, setup.plant.env, setup.ref, cfg.iterations,
                                        setup.plant.params, setup.s0)
                               .curve;
            break;
        }
        case Method::admittance: {
            result.curve = run_pure_admittance(setup.plant.params, setup.plant.env, setup.ref,
                                               cfg.iterations, setup.s0);
            break;
        }
    }

    result.out_dir = cfg.out_dir.empty()
                         ? default_out_root() / (setup.plant.name + "_" + to_string(cfg.method))
                         : cfg.out_dir;
    std::filesystem::create_directories(result.out_dir);

    result.csv_path = result.out_dir / "curve.csv";
    write_csv(result.csv_path, result.curve);

    if (cert) {
        result.certificate_path = result.out_dir / "certificate.json";
        std::ofstream out(*result.certificate_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + result.certificate_path->string());
        out << certificate_json(*cert);
    }

    result.summary_path = result.out_dir / "summary.json";
    {
        std::ofstream out(result.summary_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + result.summary_path.string());
        out << summary_json(cfg, setup, result.curve, cert).dump(2) << '\n';
    }
    return result;
}

ComparisonTable compare(const std::vector<ExperimentConfig>& cfgs) {
    if (cfgs.empty()) throw std::invalid_argument("compare: empty config list");
    for (const ExperimentConfig& c : cfgs) {
        if (c.task != cfgs.front().task || c.dt != cfgs.front().dt ||
            c.iterations != cfgs.front().iterations || c.plant_file != cfgs.front().plant_file) {
            throw std::invalid_argument("compare: configs must share task, dt and iterations");
        }
    }

    ComparisonTable table;
    table.task = cfgs.front().task;
    table.dt = cfgs.front().dt;
    table.iterations = cfgs.front().iterations;

    std::vector<ExperimentResult> results;
    for (const ExperimentConfig& c : cfgs) {
        table.methods.push_back(to_string(c.method));
        results.push_back(run_experiment(c));
    }
    table.channels = {"position", results.front().channel};

    table.cells.assign(2, std::vector<ComparisonCell>(cfgs.size()));
    for (std::size_t m = 0; m < results.size(); ++m) {
        std::vector<double> pos, force;
        for (const IterationMetrics& it : results[m].curve.iterations) {
            pos.push_back(it.rmse_position);
            force.push_back(it.rmse_force);
        }
        const bool learning = pos.size() > 1;
        table.cells[0][m] = {pos.back(), learning ? mdr(pos) : 0.0};
        table.cells[1][m] = {force.back(), learning ? mdr(force) : 0.0};
    }

    table.best.assign(2, 0);
    for (std::size_t ch = 0; ch < 2; ++ch) {
        for (std::size_t m = 1; m < cfgs.size(); ++m) {
            if (table.cells[ch][m].rmse_final < table.cells[ch][table.best[ch]].rmse_final) {
                table.best[ch] = m;
            }
        }
    }
    return table;
}

std::string render_table(const ComparisonTable& table) {
    std::ostringstream os;
    os << "task " << table.task << "  dt " << table.dt << "  iterations " << table.iterations
       << "\n";
    os << "channel     ";
    for (const std::string& m : table.methods) {
        os << " | " << m << " rmse / mdr";
    }
    os << "\n";
    for (std::size_t ch = 0; ch < table.channels.size(); ++ch) {
        char row[32];
        std::snprintf(row, sizeof(row), "%-12s", table.channels[ch].c_str());
        os << row;
        for (std::size_t m = 0; m < table.methods.size(); ++m) {
            char cell[96];
            std::snprintf(cell, sizeof(cell), " | %.6e / %.6e%s", table.cells[ch][m].rmse_final,
                          table.cells[ch][m].mdr, table.best[ch] == m ? " *" : "");
            os << cell;
        }
        os << "\n";
    }
    os << "(* best final RMSE per row)\n";
    return os.str();
}

}  // namespace ilcmbk
