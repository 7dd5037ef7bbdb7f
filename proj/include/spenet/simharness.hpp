#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "spenet/matrix.hpp"
#include "spenet/models.hpp"
#include "spenet/montecarlo.hpp"
#include "spenet/parallel.hpp"
#include "spenet/rng.hpp"

namespace spenet {

enum class ExperimentId { Sbm, Graphon, CorrEr, Beta, Multisample };

inline const char* to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::Sbm: return "sbm";
        case ExperimentId::Graphon: return "graphon";
        case ExperimentId::CorrEr: return "corr_er";
        case ExperimentId::Beta: return "beta";
        case ExperimentId::Multisample: return "multisample";
    }
    return "?";
}

inline ExperimentId experiment_from_string(const std::string& name) {
    if (name == "sbm") return ExperimentId::Sbm;
    if (name == "graphon") return ExperimentId::Graphon;
    if (name == "corr_er") return ExperimentId::CorrEr;
    if (name == "beta") return ExperimentId::Beta;
    if (name == "multisample") return ExperimentId::Multisample;
    throw std::invalid_argument("unknown experiment: " + name);
}

/// One benchmark experiment at configurable scale. The desk-scale defaults
/// keep the full suite tractable on a laptop; the full-size grid sits behind
/// the CLI --paper-scale flag.
struct ExperimentSpec {
    ExperimentId id = ExperimentId::Sbm;
    std::vector<int> n_grid = {100, 200, 300, 500};
    std::vector<int> m_grid = {10, 50};
    double rho = 1.0;  // sparsity scale applied to the model; 1 = dense
    int replicates = 1000;
    std::vector<EstimatorConfig> estimators;  // empty = per-experiment default set
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int anova_q = 20;  // Monte Carlo iterations per replicate, multisample only
};

struct CurvePoint {
    int n = 0;
    int m = 0;
    std::string estimator;
    std::string hypothesis;  // null | alt | alt2
    double rate = 0.0;
    int replicates = 0;
    double std_error = 0.0;
};

namespace detail {

constexpr std::uint64_t kHarnessData = 16;
constexpr std::uint64_t kHarnessModel = 17;
constexpr std::uint64_t kHarnessTestSeed = 18;

// Shift applied to the alternative model; natural log, doubled in the sparse
// regime.
inline double alt_shift(int m, bool sparse) {
    return (sparse ? 2.0 : 1.0) / (5.0 * std::log(static_cast<double>(m)));
}

inline std::vector<EstimatorConfig> default_estimators(ExperimentId id) {
    EstimatorConfig avg;
    avg.kind = EstimatorKind::Avg;
    EstimatorConfig sbm;
    sbm.kind = EstimatorKind::Sbm;
    sbm.communities = 2;
    EstimatorConfig mnbs;
    mnbs.kind = EstimatorKind::Mnbs;
    if (id == ExperimentId::Beta) return {avg, sbm};  // variance estimators only
    return {avg, sbm, mnbs};
}

inline NetworkGroup scale_group(NetworkGroup g, double factor) {
    if (factor == 1.0) return g;
    for (SymMatrix& net : g.nets) net = scale(net, factor);
    return g;
}

}  // namespace detail

/// Runs one experiment: per grid cell, hypothesis, and replicate, draws
/// fresh groups, runs the configured test with one Monte Carlo iteration
/// (anova_q iterations for the multisample design, which needs several to
/// estimate the gamma scale), and averages the rejections. Deterministic per
/// (spec, seed): every replicate's model, data, and test randomness live on
/// streams keyed by its grid position.
inline std::vector<CurvePoint> run_experiment(const ExperimentSpec& spec) {
    if (spec.n_grid.empty() || spec.m_grid.empty())
        throw std::invalid_argument("run_experiment: empty grid");
    if (spec.replicates < 1) throw std::invalid_argument("run_experiment: replicates must be >= 1");

    const bool sparse = spec.rho != 1.0;
    const bool weighted = spec.id == ExperimentId::Beta;
    std::vector<EstimatorConfig> estimators =
        spec.estimators.empty() ? detail::default_estimators(spec.id) : spec.estimators;
    if (weighted)
        for (const EstimatorConfig& e : estimators)
            if (e.kind == EstimatorKind::Mnbs)
                throw std::invalid_argument("run_experiment: mnbs is binary-only");

    std::vector<std::string> hypotheses = {"null", "alt"};
    if (spec.id == ExperimentId::Multisample) hypotheses.push_back("alt2");

    const std::size_t cells = spec.n_grid.size() * spec.m_grid.size();
    const std::size_t reps = static_cast<std::size_t>(spec.replicates);

    std::vector<CurvePoint> points;
    for (std::size_t ci = 0; ci < cells; ++ci) {
        const int n = spec.n_grid[ci / spec.m_grid.size()];
        const int m = spec.m_grid[ci % spec.m_grid.size()];
        const double eps = detail::alt_shift(m, sparse);

        for (std::size_t hi = 0; hi < hypotheses.size(); ++hi) {
            const bool alt = hi >= 1;
            // rejections[estimator][replicate]; multisample entries are the
            // per-replicate rejection fraction.
            std::vector<std::vector<double>> rejections(
                estimators.size(), std::vector<double>(reps, 0.0));

            parallel_for(reps, [&](std::size_t r) {
                const std::uint64_t key = (ci * hypotheses.size() + hi) * reps + r;
                RngStream model_rng(spec.seed, substream(detail::kHarnessModel, key));
                RngStream data_rng(spec.seed, substream(detail::kHarnessData, key));
                const std::uint64_t test_seed =
                    RngStream(spec.seed, substream(detail::kHarnessTestSeed, key)).next_u64();

                std::vector<NetworkGroup> groups;
                switch (spec.id) {
                    case ExperimentId::Sbm: {
                        SbmSpec base{n, two_block_membership_thirds(n), two_block_matrix(0.0)};
                        SbmSpec other{n, base.membership, two_block_matrix(alt ? eps : 0.0)};
                        SymMatrix p1 = sbm_prob_matrix(base);
                        SymMatrix p2 = sbm_prob_matrix(other);
                        if (sparse) {
                            p1 = scale(p1, spec.rho);
                            p2 = scale(p2, spec.rho);
                        }
                        groups.push_back(sample_binary_group(p1, m, data_rng));
                        groups.push_back(sample_binary_group(p2, m, data_rng));
                        break;
                    }
                    case ExperimentId::Graphon: {
                        GraphonSpec g{n, sample_latents(n, model_rng), 0};
                        SymMatrix p1 = graphon_prob_matrix(g);
                        if (sparse) p1 = scale(p1, spec.rho);
                        SymMatrix p2 = p1;
                        if (alt) {
                            const std::vector<int> subset =
                                sample_index_subset(n, n / 10, model_rng);
                            p2 = perturb_on_subset(p1, subset, eps);
                        }
                        groups.push_back(sample_binary_group(p1, m, data_rng));
                        groups.push_back(sample_binary_group(p2, m, data_rng));
                        break;
                    }
                    case ExperimentId::CorrEr: {
                        const CorrErSpec first{n, 0.9, 0.8};
                        const CorrErSpec second{n, alt ? 0.83 : 0.9, 0.8};
                        groups.push_back(sample_correlated_er_group(first, m, data_rng));
                        groups.push_back(sample_correlated_er_group(second, m, data_rng));
                        break;
                    }
                    case ExperimentId::Beta: {
                        BetaWeightSpec base;
                        base.n = n;
                        BetaWeightSpec other = base;
                        other.shift = alt ? eps : 0.0;
                        groups.push_back(detail::scale_group(
                            sample_beta_group(base, m, data_rng), spec.rho));
                        groups.push_back(detail::scale_group(
                            sample_beta_group(other, m, data_rng), spec.rho));
                        break;
                    }
                    case ExperimentId::Multisample: {
                        const double e1 = hi == 0 ? 0.0 : eps;
                        std::vector<double> shifts;
                        if (hi == 0) shifts = {0.0, 0.0, 0.0};
                        else if (hi == 1) shifts = {0.0, 0.0, e1};
                        else shifts = {0.0, e1, -e1};
                        for (double shift : shifts) {
                            SbmSpec s{n, two_block_membership_thirds(n), two_block_matrix(shift)};
                            groups.push_back(
                                sample_binary_group(sbm_prob_matrix(s), m, data_rng));
                        }
                        break;
                    }
                }

                for (std::size_t e = 0; e < estimators.size(); ++e) {
                    TestConfig cfg;
                    cfg.alpha = spec.alpha;
                    cfg.estimator = estimators[e];
                    cfg.weighted = weighted;
                    cfg.seed = test_seed;
                    if (spec.id == ExperimentId::Multisample) {
                        cfg.q = spec.anova_q;
                        rejections[e][r] = run_multisample_test(groups, cfg).rejection_rate;
                    } else {
                        cfg.q = 1;
                        rejections[e][r] =
                            run_two_sample_test(groups[0], groups[1], cfg).rejection_rate;
                    }
                }
            });

            for (std::size_t e = 0; e < estimators.size(); ++e) {
                double sum = 0.0;
                for (double v : rejections[e]) sum += v;
                CurvePoint pt;
                pt.n = n;
                pt.m = m;
                pt.estimator = to_string(estimators[e].kind);
                pt.hypothesis = hypotheses[hi];
                pt.rate = sum / static_cast<double>(reps);
                pt.replicates = spec.replicates;
                pt.std_error = std::sqrt(pt.rate * (1.0 - pt.rate) / static_cast<double>(reps));
                points.push_back(std::move(pt));
            }
        }
    }

    std::sort(points.begin(), points.end(), [](const CurvePoint& x, const CurvePoint& y) {
        return std::tie(x.estimator, x.hypothesis, x.n, x.m) <
               std::tie(y.estimator, y.hypothesis, y.n, y.m);
    });
    return points;
}

/// Soft regression flags: an alternative curve whose rate at the largest n
/// falls below its rate at the smallest n is suspicious but not asserted
/// (curves are stochastic).
inline std::vector<std::string> monotonicity_warnings(const std::vector<CurvePoint>& points) {
    std::vector<std::string> warnings;
    // group by (estimator, hypothesis, m); points arrive sorted by n inside
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].hypothesis == "null") continue;
        std::size_t first = i, last = i;
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[j].estimator != points[i].estimator ||
                points[j].hypothesis != points[i].hypothesis || points[j].m != points[i].m)
                break;
            last = j;
        }
        if (last > first && points[last].rate < points[first].rate) {
            std::ostringstream oss;
            oss << "non-monotone power curve: estimator=" << points[first].estimator
                << " hypothesis=" << points[first].hypothesis << " m=" << points[first].m
                << " rate(n=" << points[first].n << ")=" << points[first].rate
                << " > rate(n=" << points[last].n << ")=" << points[last].rate;
            warnings.push_back(oss.str());
        }
        i = last;
    }
    return warnings;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string format_curves(const std::vector<CurvePoint>& points) {
    std::string out = "n,m,estimator,hypothesis,rate,replicates,stderr\n";
    for (const CurvePoint& p : points) {
        out += std::to_string(p.n) + ',' + std::to_string(p.m) + ',' + p.estimator + ',' +
               p.hypothesis + ',' + detail::format_double(p.rate) + ',' +
               std::to_string(p.replicates) + ',' + detail::format_double(p.std_error) + '\n';
    }
    return out;
}

inline void emit_curves(const std::vector<CurvePoint>& points, const std::string& path) {
    if (points.empty()) throw std::invalid_argument("emit_curves: no points");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_curves: cannot write " + path);
    out << format_curves(points);
    if (!out) throw std::runtime_error("emit_curves: write failed for " + path);
}

inline std::vector<CurvePoint> parse_curves(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "n,m,estimator,hypothesis,rate,replicates,stderr")
        throw std::runtime_error("parse_curves: bad header");
    std::vector<CurvePoint> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t pos = 0; pos <= line.size(); ++pos) {
            if (pos == line.size() || line[pos] == ',') {
                fields.push_back(line.substr(start, pos - start));
                start = pos + 1;
            }
        }
        if (fields.size() != 7) throw std::runtime_error("parse_curves: bad row: " + line);
        CurvePoint p;
        p.n = std::stoi(fields[0]);
        p.m = std::stoi(fields[1]);
        p.estimator = fields[2];
        p.hypothesis = fields[3];
        p.rate = std::strtod(fields[4].c_str(), nullptr);
        p.replicates = std::stoi(fields[5]);
        p.std_error = std::strtod(fields[6].c_str(), nullptr);
        points.push_back(std::move(p));
    }
    return points;
}

/// JSON schema mirrors ExperimentSpec: {"experiment", "n_grid", "m_grid",
/// "rho", "replicates", "estimators" (names or objects with "kind"/"k"/
/// "mnbs_c"/"delta"/"sigma_min"), "alpha", "seed", "anova_q"}.
inline ExperimentSpec experiment_spec_from_json(const nlohmann::json& j) {
    ExperimentSpec spec;
    spec.id = experiment_from_string(j.at("experiment").get<std::string>());
    if (j.contains("n_grid")) spec.n_grid = j.at("n_grid").get<std::vector<int>>();
    if (j.contains("m_grid")) spec.m_grid = j.at("m_grid").get<std::vector<int>>();
    if (j.contains("rho")) spec.rho = j.at("rho").get<double>();
    if (j.contains("replicates")) spec.replicates = j.at("replicates").get<int>();
    if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("anova_q")) spec.anova_q = j.at("anova_q").get<int>();
    if (j.contains("estimators")) {
        for (const nlohmann::json& item : j.at("estimators")) {
            EstimatorConfig cfg;
            if (item.is_string()) {
                cfg.kind = estimator_from_string(item.get<std::string>());
            } else {
                cfg.kind = estimator_from_string(item.at("kind").get<std::string>());
                if (item.contains("k")) cfg.communities = item.at("k").get<int>();
                if (item.contains("mnbs_c")) cfg.mnbs_c = item.at("mnbs_c").get<double>();
                if (item.contains("delta")) cfg.delta = item.at("delta").get<double>();
                if (item.contains("sigma_min")) cfg.sigma_min = item.at("sigma_min").get<double>();
            }
            spec.estimators.push_back(cfg);
        }
    }
    return spec;
}

}  // namespace spenet
