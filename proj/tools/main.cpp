#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ilcmbk/harness.hpp"

namespace {

using namespace ilcmbk;

struct RunFlags {
    std::string config_path;
    std::string task;
    std::string method;
    std::string plant;
    std::string out;
    std::size_t iterations = 750;
    double dt = 0.05;
    double alpha = 0.3;
    double clamp = 10.0;
    double mu = 1.0;
    double eta = 1.0;
    std::uint64_t seed = 1;
    double init_dv = 0.0;
    double init_dx = 0.0;
    double inconsistent = 0.0;
    double depth = 0.0;
    double t_end = 0.0;
    bool true_c = false;
};

// Flags override config-file fields only when actually passed.
ExperimentConfig build_config(const CLI::App& cmd, const RunFlags& f) {
    ExperimentConfig cfg;
    if (cmd.count("--config") > 0) {
        cfg = experiment_from_config(ConfigTree::parse_file(f.config_path));
    }
    auto passed = [&cmd](const char* name) { return cmd.get_option_no_throw(name) != nullptr &&
                                                    cmd.count(name) > 0; };
    if (passed("--task")) cfg.task = f.task;
    if (passed("--method")) cfg.method = method_from_string(f.method);
    if (passed("--plant")) cfg.plant_file = f.plant;
    if (passed("--iterations")) cfg.iterations = f.iterations;
    if (passed("--dt")) cfg.dt = f.dt;
    if (passed("--alpha")) cfg.learn.alpha = f.alpha;
    if (passed("--clamp")) cfg.learn.clamp_limit = f.clamp;
    if (passed("--mu")) cfg.learn.mu = f.mu;
    if (passed("--eta")) cfg.learn.eta = f.eta;
    if (passed("--seed")) cfg.seed = f.seed;
    if (passed("--out")) cfg.out_dir = f.out;
    if (passed("--init-dv")) cfg.init_dv = f.init_dv;
    if (passed("--init-dx")) cfg.init_dx = f.init_dx;
    if (passed("--inconsistent")) cfg.inconsistency = f.inconsistent;
    if (passed("--depth")) cfg.depth = f.depth;
    if (passed("--t-end")) cfg.t_end = f.t_end;
    if (passed("--true-C")) cfg.use_true_c = f.true_c;
    return cfg;
}

void add_shared_flags(CLI::App* cmd, RunFlags& f, bool with_task, bool with_learn_knobs) {
    cmd->add_option("--config", f.config_path, "Config file (key = value schema)");
    if (with_task) cmd->add_option("--task", f.task, "Built-in plant preset name");
    cmd->add_option("--plant", f.plant, "Plant config file instead of a preset");
    cmd->add_option("--iterations", f.iterations, "Learning iterations (default 750)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--dt", f.dt, "Control period in seconds (default 0.05)")
        ->check(CLI::PositiveNumber);
    if (with_learn_knobs) {
        cmd->add_option("--alpha", f.alpha, "ILC learning rate (default 0.3)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--clamp", f.clamp, "Gain-correction infinity-norm limit (default 10)");
        cmd->add_option("--mu", f.mu, "Output-map estimator regularization (default 1)");
        cmd->add_option("--eta", f.eta, "Output-map estimator step in (0, 2] (default 1)");
    }
    cmd->add_option("--seed", f.seed, "Seed for the reference perturbation (default 1)");
    cmd->add_option("--out", f.out, "Output directory (default $ILCMBK_OUT_ROOT/<task>_<method>)");
    cmd->add_option("--init-dv", f.init_dv,
                    "Initial velocity error (default 10% of peak |v_r|)");
    cmd->add_option("--init-dx", f.init_dx, "Initial position error (default 0)");
    cmd->add_option("--inconsistent", f.inconsistent,
                    "Force-reference noise amplitude, fraction of peak |f_r|");
    cmd->add_option("--depth", f.depth, "Override the preset travel depth");
    cmd->add_option("--t-end", f.t_end, "Override the preset motion duration");
    cmd->add_flag("--true-C", f.true_c, "Certificate alpha0 from secant C instead of the estimate");
}

int do_run(const CLI::App& cmd, const RunFlags& f) {
    const ExperimentResult result = run_experiment(build_config(cmd, f));
    std::cout << "wrote " << result.csv_path.string() << "\n";
    std::cout << "wrote " << result.summary_path.string() << "\n";
    if (result.certificate_path) std::cout << "wrote " << result.certificate_path->string() << "\n";
    return 0;
}

int do_compare(const CLI::App& cmd, const RunFlags& f, const std::string& task_arg) {
    std::vector<std::string> tasks;
    if (task_arg == "all") {
        tasks = preset_names();
    } else {
        std::istringstream in(task_arg);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            if (!tok.empty()) tasks.push_back(tok);
        }
    }
    if (tasks.empty()) throw std::invalid_argument("compare: no tasks given");

    const std::filesystem::path root = f.out.empty() ? default_out_root() : f.out;
    for (const std::string& task : tasks) {
        std::vector<ExperimentConfig> cfgs;
        for (Method m : {Method::ilc_mbk, Method::mfac, Method::admittance}) {
            ExperimentConfig cfg = build_config(cmd, f);
            cfg.task = task;
            cfg.method = m;
            cfg.out_dir = root / (task + "_" + to_string(m));
            cfgs.push_back(cfg);
        }
        const ComparisonTable table = compare(cfgs);
        std::cout << render_table(table);

        nlohmann::json j;
        j["task"] = table.task;
        j["dt"] = table.dt;
        j["iterations"] = table.iterations;
        j["methods"] = table.methods;
        j["channels"] = table.channels;
        for (std::size_t ch = 0; ch < table.channels.size(); ++ch) {
            for (std::size_t m = 0; m < table.methods.size(); ++m) {
                j["rmse"][table.channels[ch]][table.methods[m]] = table.cells[ch][m].rmse_final;
                j["mdr"][table.channels[ch]][table.methods[m]] = table.cells[ch][m].mdr;
            }
            j["best"][table.channels[ch]] = table.methods[table.best[ch]];
        }
        std::filesystem::create_directories(root);
        const std::filesystem::path out = root / ("comparison_" + task + ".json");
        std::ofstream os(out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + out.string());
        os << j.dump(2) << '\n';
        std::cout << "wrote " << out.string() << "\n";
    }
    return 0;
}

int do_certify(const CLI::App& cmd, const RunFlags& f, const std::string& out_file) {
    ExperimentConfig cfg = build_config(cmd, f);
    cfg.method = Method::ilc_mbk;
    if (cmd.count("--iterations") == 0) cfg.iterations = 1;

    const Preset plant = cfg.plant_file ? load_plant(*cfg.plant_file) : preset(cfg.task);
    ReferenceTrajectory ref = make_reference(plant.env, cfg.depth.value_or(plant.depth),
                                             cfg.t_end.value_or(plant.t_end), cfg.dt);
    if (cfg.inconsistency != 0.0) {
        ref = perturb_force_reference(std::move(ref), cfg.inconsistency, cfg.seed);
    }
    double dv = cfg.init_dv;
    if (std::isnan(dv)) {
        double peak = 0.0;
        for (const auto& s : ref.samples) peak = std::max(peak, std::abs(s[0]));
        dv = 0.1 * peak;
    }
    LearnConfig lc = cfg.learn;
    lc.iterations = cfg.iterations;
    LearnOptions opts;
    opts.s0 = {dv, cfg.init_dx};
    opts.use_true_c = cfg.use_true_c;

    const LearnResult lr = run_learning(lc, plant.env, ref, plant.params, opts);
    if (!lr.final_certificate) throw std::runtime_error("certify: no certificate produced");
    const std::string doc = certificate_json(*lr.final_certificate);
    std::cout << doc;
    if (!out_file.empty()) {
        std::ofstream os(out_file, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + out_file);
        os << doc;
    }
    return 0;
}

std::vector<double> parse_list(const std::string& raw, const char* what) {
    std::vector<double> out;
    std::istringstream in(raw);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string(what) + ": cannot parse '" + tok + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

int do_sweep(const CLI::App& cmd, const RunFlags& f, const std::string& alphas_raw,
             const std::string& clamps_raw, const std::string& mus_raw,
             const std::string& etas_raw, unsigned jobs) {
    const std::vector<double> alphas = parse_list(alphas_raw, "--alpha");
    const std::vector<double> clamps = parse_list(clamps_raw, "--clamp");
    const std::vector<double> mus = parse_list(mus_raw, "--mu");
    const std::vector<double> etas = parse_list(etas_raw, "--eta");

    const std::filesystem::path root =
        (f.out.empty() ? default_out_root() : std::filesystem::path(f.out)) / "sweep";

    struct Combo {
        ExperimentConfig cfg;
        std::string label;
        IterationMetrics final{};
        std::string error;
        bool diverged = false;
    };
    std::vector<Combo> combos;
    for (double alpha : alphas) {
        for (double clamp : clamps) {
            for (double mu : mus) {
                for (double eta : etas) {
                    Combo combo;
                    combo.cfg = build_config(cmd, f);
                    combo.cfg.method = Method::ilc_mbk;
                    combo.cfg.learn.alpha = alpha;
                    combo.cfg.learn.clamp_limit = clamp;
                    combo.cfg.learn.mu = mu;
                    combo.cfg.learn.eta = eta;
                    char label[128];
                    std::snprintf(label, sizeof(label), "alpha%g_clamp%g_mu%g_eta%g", alpha, clamp,
                                  mu, eta);
                    combo.label = label;
                    combo.cfg.out_dir = root / combo.label;
                    combos.push_back(std::move(combo));
                }
            }
        }
    }

    if (jobs == 0) jobs = 1;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= combos.size()) return;
            try {
                const ExperimentResult r = run_experiment(combos[i].cfg);
                combos[i].final = r.curve.iterations.back();
            } catch (const DivergenceError& e) {
                combos[i].error = e.what();
                combos[i].diverged = true;
            } catch (const std::exception& e) {
                combos[i].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    std::filesystem::create_directories(root);
    const std::filesystem::path index = root / "index.csv";
    std::ofstream os(index, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + index.string());
    os << "alpha,clamp_limit,mu,eta,rmse_position,rmse_force,e_inf,cert_norm_gm,status\n";
    char line[512];
    for (const Combo& c : combos) {
        if (c.error.empty()) {
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,ok\n",
                          c.cfg.learn.alpha, c.cfg.learn.clamp_limit, c.cfg.learn.mu,
                          c.cfg.learn.eta, c.final.rmse_position, c.final.rmse_force, c.final.e_inf,
                          c.final.cert_norm_gm);
        } else {
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,nan,nan,nan,nan,%s\n",
                          c.cfg.learn.alpha, c.cfg.learn.clamp_limit, c.cfg.learn.mu,
                          c.cfg.learn.eta, c.diverged ? "diverged" : "failed");
        }
        os << line;
    }
    std::cout << "wrote " << index.string() << " (" << combos.size() << " combos)\n";

    for (const Combo& c : combos) {
        if (!c.error.empty()) std::cerr << c.label << ": " << c.error << "\n";
    }
    return 0;
}

int do_presets() {
    for (const std::string& name : preset_names()) {
        const Preset p = preset(name);
        std::printf("%s: m=%g b=%g k=%g depth=%g t_end=%g channel=%s\n", p.name.c_str(),
                    p.params.m, p.params.b, p.params.k, p.depth, p.t_end, p.channel.c_str());
        std::printf("  breakpoints:");
        for (const auto& [x, force] : p.env.breakpoints) std::printf(" %g:%g", x, force);
        std::printf("\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iterative-learning admittance gain tuning lab"};
    app.require_subcommand(1);

    RunFlags run_flags, compare_flags, certify_flags, sweep_flags;

    CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment and persist its results");
    add_shared_flags(run_cmd, run_flags, /*with_task=*/true, /*with_learn_knobs=*/true);
    run_cmd->add_option("--method", run_flags.method, "ilc_mbk | mfac | admittance");

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Run all three methods per task and tabulate the results");
    std::string compare_tasks = "all";
    add_shared_flags(compare_cmd, compare_flags, /*with_task=*/false, /*with_learn_knobs=*/true);
    compare_cmd->add_option("--task", compare_tasks, "Preset name, comma list, or 'all'");

    CLI::App* certify_cmd =
        app.add_subcommand("certify", "Emit the convergence certificate for a learning setup");
    add_shared_flags(certify_cmd, certify_flags, /*with_task=*/true, /*with_learn_knobs=*/true);
    std::string certify_out;
    certify_cmd->add_option("--out-file", certify_out, "Also write the JSON document here");

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Grid over alpha/clamp/mu/eta with a bounded worker pool");
    add_shared_flags(sweep_cmd, sweep_flags, /*with_task=*/true, /*with_learn_knobs=*/false);
    std::string sweep_alphas = "0.1,0.3,0.5", sweep_clamps = "10", sweep_mus = "1",
                sweep_etas = "1";
    sweep_cmd->add_option("--alpha", sweep_alphas, "Comma list of learning rates");
    sweep_cmd->add_option("--clamp", sweep_clamps, "Comma list of clamp limits");
    sweep_cmd->add_option("--mu", sweep_mus, "Comma list of estimator mu values");
    sweep_cmd->add_option("--eta", sweep_etas, "Comma list of estimator eta values");
    unsigned sweep_jobs = std::min(4u, std::max(1u, std::thread::hardware_concurrency()));
    sweep_cmd->add_option("--jobs", sweep_jobs, "Worker pool size");

    CLI::App* presets_cmd = app.add_subcommand("presets", "List the built-in task presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) return do_run(*run_cmd, run_flags);
        if (compare_cmd->parsed()) return do_compare(*compare_cmd, compare_flags, compare_tasks);
        if (certify_cmd->parsed()) return do_certify(*certify_cmd, certify_flags, certify_out);
        if (sweep_cmd->parsed()) {
            return do_sweep(*sweep_cmd, sweep_flags, sweep_alphas, sweep_clamps, sweep_mus,
                            sweep_etas, sweep_jobs);
        }
        if (presets_cmd->parsed()) return do_presets();
    } catch (const ilcmbk::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
