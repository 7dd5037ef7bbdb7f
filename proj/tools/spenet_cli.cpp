// Command-line front end: two-sample and multi-sample spectral tests for
// populations of networks, the simulation harness, the binarization sweep,
// and null calibration.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "spenet/spenet.hpp"

namespace {

struct CommonOpts {
    double alpha = 0.05;
    int q = 1000;
    std::string estimator = "avg";
    int k = 0;
    double mnbs_c = spenet::kDefaultMnbsC;
    double delta = 0.0;
    double sigma_min = spenet::kDefaultSigmaMin;
    bool weighted = false;
    std::uint64_t seed = 0;
    std::string out;
    bool json = false;
    int threads = 0;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts, bool with_weighted = true) {
    cmd->add_option("--alpha", opts.alpha, "Significance level")->capture_default_str();
    cmd->add_option("--q", opts.q, "Monte Carlo iterations per test")->capture_default_str();
    cmd->add_option("--estimator", opts.estimator, "Estimator: avg, sbm, or mnbs")
        ->capture_default_str();
    cmd->add_option("--k", opts.k, "Community count for the sbm estimator");
    cmd->add_option("--mnbs-c", opts.mnbs_c, "Quantile constant for the mnbs estimator")
        ->capture_default_str();
    cmd->add_option("--delta", opts.delta, "Probability clamp (0 = 1/(m n))");
    cmd->add_option("--sigma-min", opts.sigma_min, "Variance floor for weighted tests")
        ->capture_default_str();
    if (with_weighted) cmd->add_flag("--weighted", opts.weighted, "Weighted-network test");
    cmd->add_option("--seed", opts.seed, "Master seed")->capture_default_str();
    cmd->add_option("--out", opts.out, "Write the result document to this path");
    cmd->add_flag("--json", opts.json, "Compact single-line JSON on stdout");
    cmd->add_option("--threads", opts.threads, "Worker threads (default: hardware)");
}

spenet::EstimatorConfig make_estimator(const CommonOpts& opts) {
    spenet::EstimatorConfig cfg;
    cfg.kind = spenet::estimator_from_string(opts.estimator);
    if (cfg.kind == spenet::EstimatorKind::Sbm) {
        if (opts.k < 1)
            throw CLI::ValidationError("--estimator sbm requires --k <communities>");
        cfg.communities = opts.k;
    }
    cfg.mnbs_c = opts.mnbs_c;
    cfg.delta = opts.delta;
    cfg.sigma_min = opts.sigma_min;
    return cfg;
}

spenet::TestConfig make_config(const CommonOpts& opts) {
    spenet::TestConfig cfg;
    cfg.alpha = opts.alpha;
    cfg.q = opts.q;
    cfg.estimator = make_estimator(opts);
    cfg.weighted = opts.weighted;
    cfg.seed = opts.seed;
    return cfg;
}

void apply_threads(const CommonOpts& opts) {
    if (opts.threads >= 1) setenv("SPENET_THREADS", std::to_string(opts.threads).c_str(), 1);
}

spenet::NetworkGroup load_group_checked(const std::string& manifest_path) {
    std::vector<std::string> warnings;
    const spenet::NetworkGroup g =
        spenet::load_group(spenet::load_manifest(manifest_path), &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
    return g;
}

void emit_document(const nlohmann::json& doc, const CommonOpts& opts) {
    const std::string text = opts.json ? doc.dump() : doc.dump(2);
    std::cout << text << '\n';
    if (!opts.out.empty()) {
        std::ofstream out(opts.out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + opts.out);
        out << text << '\n';
    }
}

std::vector<double> parse_threshold_grid(const std::string& csv) {
    std::vector<double> grid;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t pos = csv.find(',', start);
        const std::string tok = csv.substr(start, pos == std::string::npos ? pos : pos - start);
        if (!tok.empty()) grid.push_back(std::strtod(tok.c_str(), nullptr));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral hypothesis tests for populations of networks"};
    app.require_subcommand(1);

    // --- test ---
    CommonOpts test_opts;
    std::vector<std::string> test_manifests;
    CLI::App* cmd_test = app.add_subcommand("test", "Two-sample test from two group manifests");
    cmd_test->add_option("manifests", test_manifests, "Two group manifest JSON files")
        ->expected(2)
        ->required();
    add_common_flags(cmd_test, test_opts);

    // --- anova ---
    CommonOpts anova_opts;
    std::vector<std::string> anova_manifests;
    CLI::App* cmd_anova =
        app.add_subcommand("anova", "Multi-sample test from S >= 2 group manifests");
    cmd_anova->add_option("manifests", anova_manifests, "Group manifest JSON files")
        ->expected(2, -1)
        ->required();
    add_common_flags(cmd_anova, anova_opts, /*with_weighted=*/false);

    // --- simulate ---
    CommonOpts sim_opts;
    std::string sim_spec_file;
    std::string sim_experiment = "sbm";
    int sim_replicates = 0;
    bool paper_scale = false;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "Run a benchmark experiment, emit curves");
    cmd_sim->add_option("spec", sim_spec_file, "Experiment spec JSON file (optional)");
    cmd_sim->add_option("--experiment", sim_experiment,
                        "Experiment when no spec file is given: sbm, graphon, corr_er, beta, "
                        "multisample")
        ->capture_default_str();
    cmd_sim->add_option("--replicates", sim_replicates, "Override replicate count");
    cmd_sim->add_flag("--paper-scale", paper_scale,
                      "Full-size grid: n up to 1000, 5000 replicates");
    cmd_sim->add_option("--seed", sim_opts.seed, "Master seed")->capture_default_str();
    cmd_sim->add_option("--out", sim_opts.out, "Write the CSV here (default: stdout)");
    cmd_sim->add_option("--threads", sim_opts.threads, "Worker threads (default: hardware)");

    // --- sweep ---
    CommonOpts sweep_opts;
    std::vector<std::string> sweep_manifests;
    std::string sweep_grid = "0.1,0.2,0.3,0.4,0.5,0.6";
    std::vector<std::string> sweep_estimators;
    int subsample_replicates = 1000;
    CLI::App* cmd_sweep = app.add_subcommand(
        "sweep", "Binarization threshold sweep over one (null protocol) or two groups");
    cmd_sweep->add_option("manifests", sweep_manifests, "One or two weighted group manifests")
        ->expected(1, 2)
        ->required();
    cmd_sweep->add_option("--thresholds", sweep_grid, "Comma-separated strictly increasing grid")
        ->capture_default_str();
    cmd_sweep
        ->add_option("--estimator", sweep_estimators,
                     "Estimator(s) to run, repeatable: avg, sbm, mnbs")
        ->capture_default_str();
    cmd_sweep->add_option("--subsample-replicates", subsample_replicates,
                          "Subsample draws per point in the single-group null protocol")
        ->capture_default_str();
    cmd_sweep->add_option("--alpha", sweep_opts.alpha, "Significance level")->capture_default_str();
    cmd_sweep->add_option("--q", sweep_opts.q, "Monte Carlo iterations (two-group mode)")
        ->capture_default_str();
    cmd_sweep->add_option("--k", sweep_opts.k, "Community count for the sbm estimator");
    cmd_sweep->add_option("--seed", sweep_opts.seed, "Master seed")->capture_default_str();
    cmd_sweep->add_option("--out", sweep_opts.out, "Write the sweep CSV here");
    cmd_sweep->add_flag("--json", sweep_opts.json, "Compact single-line JSON on stdout");
    cmd_sweep->add_option("--threads", sweep_opts.threads, "Worker threads");

    // --- calibrate ---
    CommonOpts cal_opts;
    int cal_n = 100, cal_m = 10, cal_replicates = 1000;
    bool cal_oracle = false;
    cal_opts.estimator = "avg";
    CLI::App* cmd_cal = app.add_subcommand(
        "calibrate", "Null-calibration run on the two-block benchmark model");
    cmd_cal->add_option("--n", cal_n, "Node count")->capture_default_str();
    cmd_cal->add_option("--m", cal_m, "Networks per group")->capture_default_str();
    cmd_cal->add_option("--replicates", cal_replicates, "Fresh group pairs (>= 100)")
        ->capture_default_str();
    cmd_cal->add_flag("--oracle", cal_oracle, "Use the true link probabilities");
    add_common_flags(cmd_cal, cal_opts, /*with_weighted=*/false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_test) {
            apply_threads(test_opts);
            if (test_opts.weighted && test_opts.estimator == "mnbs")
                throw CLI::ValidationError("--estimator mnbs is binary-only");
            const spenet::TestConfig cfg = make_config(test_opts);
            const spenet::NetworkGroup g1 = load_group_checked(test_manifests[0]);
            const spenet::NetworkGroup g2 = load_group_checked(test_manifests[1]);
            const spenet::TestResult res = spenet::run_two_sample_test(g1, g2, cfg);
            emit_document(spenet::result_to_json(res), test_opts);
            std::cerr << "elapsed: " << res.elapsed_seconds << " s\n";
        } else if (*cmd_anova) {
            apply_threads(anova_opts);
            const spenet::TestConfig cfg = make_config(anova_opts);
            std::vector<spenet::NetworkGroup> groups;
            for (const std::string& path : anova_manifests)
                groups.push_back(load_group_checked(path));
            const spenet::TestResult res = spenet::run_multisample_test(groups, cfg);
            emit_document(spenet::result_to_json(res), anova_opts);
            std::cerr << "elapsed: " << res.elapsed_seconds << " s\n";
        } else if (*cmd_sim) {
            apply_threads(sim_opts);
            spenet::ExperimentSpec spec;
            if (!sim_spec_file.empty()) {
                std::ifstream in(sim_spec_file);
                if (!in) throw std::runtime_error("cannot open spec: " + sim_spec_file);
                nlohmann::json j;
                in >> j;
                spec = spenet::experiment_spec_from_json(j);
            } else {
                spec.id = spenet::experiment_from_string(sim_experiment);
            }
            spec.seed = sim_opts.seed ? sim_opts.seed : spec.seed;
            if (paper_scale) {
                spec.n_grid = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
                spec.replicates = 5000;
            }
            if (sim_replicates > 0) spec.replicates = sim_replicates;
            const std::vector<spenet::CurvePoint> points = spenet::run_experiment(spec);
            for (const std::string& w : spenet::monotonicity_warnings(points))
                std::cerr << "warning: " << w << '\n';
            if (sim_opts.out.empty())
                std::cout << spenet::format_curves(points);
            else
                spenet::emit_curves(points, sim_opts.out);
        } else if (*cmd_sweep) {
            apply_threads(sweep_opts);
            const std::vector<double> grid = parse_threshold_grid(sweep_grid);
            if (sweep_estimators.empty()) sweep_estimators = {"avg"};
            std::vector<spenet::EstimatorConfig> estimators;
            for (const std::string& name : sweep_estimators) {
                CommonOpts one = sweep_opts;
                one.estimator = name;
                estimators.push_back(make_estimator(one));
            }
            spenet::TestConfig cfg;
            cfg.alpha = sweep_opts.alpha;
            cfg.q = sweep_opts.q;
            cfg.seed = sweep_opts.seed;
            const spenet::NetworkGroup g1 = load_group_checked(sweep_manifests[0]);
            std::optional<spenet::NetworkGroup> g2;
            if (sweep_manifests.size() == 2) g2 = load_group_checked(sweep_manifests[1]);
            const spenet::ThresholdSweepResult res =
                spenet::threshold_sweep(g1, g2, grid, estimators, cfg, subsample_replicates);
            const nlohmann::json doc = spenet::sweep_to_json(res);
            std::cout << (sweep_opts.json ? doc.dump() : doc.dump(2)) << '\n';
            if (!sweep_opts.out.empty()) {
                std::ofstream out(sweep_opts.out, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write " + sweep_opts.out);
                out << spenet::sweep_to_csv(res);
            }
        } else if (*cmd_cal) {
            apply_threads(cal_opts);
            spenet::TestConfig cfg = make_config(cal_opts);
            const spenet::SymMatrix p = spenet::sbm_prob_matrix(
                {cal_n, spenet::two_block_membership_thirds(cal_n),
                 spenet::two_block_matrix(0.0)});
            const spenet::CalibrationSummary summary = spenet::null_calibration(
                [&](spenet::RngStream&) { return p; }, cal_m, cal_replicates, cfg, cal_oracle);
            nlohmann::json doc = spenet::calibration_to_json(summary);
            doc["n"] = cal_n;
            doc["m"] = cal_m;
            doc["oracle"] = cal_oracle;
            doc["estimator"] = cal_oracle ? "oracle" : cal_opts.estimator;
            doc["alpha"] = cal_opts.alpha;
            doc["seed"] = cal_opts.seed;
            emit_document(doc, cal_opts);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
