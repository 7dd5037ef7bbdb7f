#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spenet/matrix.hpp"
#include "spenet/models.hpp"
#include "spenet/montecarlo.hpp"

namespace spenet {

/// Describes one on-disk group of networks, one file per network.
struct GroupManifest {
    enum class Format { DenseCsv, EdgeList };

    std::string label;
    Format format = Format::DenseCsv;
    int n = 0;
    std::vector<std::string> files;  // absolute, or relative to the manifest
    bool weighted = false;
};

inline const char* to_string(GroupManifest::Format f) {
    return f == GroupManifest::Format::DenseCsv ? "dense-csv" : "edge-list";
}

inline GroupManifest::Format manifest_format_from_string(const std::string& s) {
    if (s == "dense-csv") return GroupManifest::Format::DenseCsv;
    if (s == "edge-list") return GroupManifest::Format::EdgeList;
    throw std::invalid_argument("unknown group format: " + s);
}

/// Reads a manifest JSON document: {"label", "format", "n", "files",
/// "weighted"}; file paths are resolved against the manifest's directory.
inline GroupManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    nlohmann::json j;
    in >> j;
    GroupManifest man;
    man.label = j.value("label", std::string{});
    man.format = manifest_format_from_string(j.at("format").get<std::string>());
    man.n = j.at("n").get<int>();
    man.weighted = j.value("weighted", false);
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    for (const nlohmann::json& f : j.at("files")) {
        std::filesystem::path p = f.get<std::string>();
        if (p.is_relative()) p = base / p;
        man.files.push_back(p.string());
    }
    if (man.files.empty()) throw std::invalid_argument("manifest has no files: " + path);
    return man;
}

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& file, int line, const std::string& what) {
    throw std::runtime_error(file + ":" + std::to_string(line) + ": " + what);
}

inline double parse_real(const std::string& file, int line, const std::string& token) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') parse_fail(file, line, "unparseable value '" + token + "'");
    return v;
}

inline Eigen::MatrixXd read_dense_csv(const std::string& file, int n) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    Eigen::MatrixXd m(n, n);
    std::string line;
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) parse_fail(file, i + 1, "expected " + std::to_string(n) + " rows");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t pos = 0; pos <= line.size(); ++pos) {
            if (pos == line.size() || line[pos] == ',') {
                fields.push_back(line.substr(start, pos - start));
                start = pos + 1;
            }
        }
        if (static_cast<int>(fields.size()) != n)
            parse_fail(file, i + 1, "dimension mismatch: expected " + std::to_string(n) +
                                        " columns, got " + std::to_string(fields.size()));
        for (int j = 0; j < n; ++j) m(i, j) = parse_real(file, i + 1, fields[static_cast<std::size_t>(j)]);
    }
    return m;
}

inline Eigen::MatrixXd read_edge_list(const std::string& file, int n,
                                      std::vector<std::string>* warnings) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::string line;
    if (!std::getline(in, line)) parse_fail(file, 1, "missing header");
    {
        std::istringstream header(line);
        int declared = 0;
        if (!(header >> declared)) parse_fail(file, 1, "unparseable node count");
        std::string extra;
        if (header >> extra) parse_fail(file, 1, "unexpected token after node count");
        if (declared != n)
            parse_fail(file, 1, "dimension mismatch: manifest declares n=" + std::to_string(n) +
                                    ", file declares n=" + std::to_string(declared));
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        int i = 0, j = 0;
        if (!(row >> i >> j)) parse_fail(file, lineno, "unparseable edge line");
        double w = 1.0;
        std::string token;
        if (row >> token) {
            w = parse_real(file, lineno, token);
            std::string extra;
            if (row >> extra) parse_fail(file, lineno, "unexpected token after weight");
        }
        if (i < 1 || i > n || j < 1 || j > n) parse_fail(file, lineno, "node index out of range");
        const int a = i - 1, b = j - 1;
        if (m(a, b) != 0.0 && m(a, b) != w && warnings)
            warnings->push_back(file + ":" + std::to_string(lineno) +
                                ": conflicting duplicate edge, keeping max");
        m(a, b) = std::max(m(a, b), w);
        m(b, a) = std::max(m(b, a), w);
    }
    return m;
}

}  // namespace detail

/// Loads the manifest's networks. Asymmetric input is symmetrized by the
/// max of the two mirror entries and reported; nonzero diagonals are forced
/// to zero and reported. A group declared binary rejects entries outside
/// [0,1].
inline NetworkGroup load_group(const GroupManifest& manifest,
                               std::vector<std::string>* warnings = nullptr) {
    NetworkGroup group;
    group.weighted = manifest.weighted;
    group.nets.reserve(manifest.files.size());
    for (const std::string& file : manifest.files) {
        Eigen::MatrixXd raw = manifest.format == GroupManifest::Format::DenseCsv
                                  ? detail::read_dense_csv(file, manifest.n)
                                  : detail::read_edge_list(file, manifest.n, warnings);
        const Eigen::MatrixXd mirrored = raw.transpose();
        if ((raw.array() != mirrored.array()).any()) {
            if (warnings) warnings->push_back(file + ": asymmetric input symmetrized by max");
            raw = raw.cwiseMax(mirrored);
        }
        if ((raw.diagonal().array() != 0.0).any()) {
            if (warnings) warnings->push_back(file + ": nonzero diagonal forced to zero");
            raw.diagonal().setZero();
        }
        if (!manifest.weighted) {
            for (int i = 0; i < manifest.n; ++i)
                for (int j = 0; j < manifest.n; ++j)
                    if (!(raw(i, j) >= 0.0 && raw(i, j) <= 1.0))
                        throw std::runtime_error(file + ": entry outside [0,1] in binary group");
        }
        group.nets.push_back(SymMatrix::from_dense_unchecked(std::move(raw)));
    }
    return group;
}

namespace detail {

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Writes the group under dir as one file per network plus a manifest JSON
/// at dir/<label>.manifest.json; load_group inverts it bitwise.
inline std::string write_group(const NetworkGroup& group, const std::string& dir,
                               const std::string& label,
                               GroupManifest::Format format = GroupManifest::Format::DenseCsv) {
    if (group.nets.empty()) throw std::invalid_argument("write_group: empty sample");
    group.validate();
    const int n = group.node_count();
    std::filesystem::create_directories(dir);

    nlohmann::json files = nlohmann::json::array();
    const char* ext = format == GroupManifest::Format::DenseCsv ? ".csv" : ".edges";
    for (std::size_t k = 0; k < group.nets.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%03zu%s", label.c_str(), k, ext);
        const std::filesystem::path path = std::filesystem::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("write_group: cannot write " + path.string());
        const SymMatrix& net = group.nets[k];
        if (format == GroupManifest::Format::DenseCsv) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (j) out << ',';
                    out << detail::format_real(net(i, j));
                }
                out << '\n';
            }
        } else {
            out << n << '\n';
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (net(i, j) != 0.0) {
                        out << (i + 1) << ' ' << (j + 1);
                        if (net(i, j) != 1.0) out << ' ' << detail::format_real(net(i, j));
                        out << '\n';
                    }
        }
        files.push_back(name);
    }

    nlohmann::json man;
    man["label"] = label;
    man["format"] = to_string(format);
    man["n"] = n;
    man["files"] = files;
    man["weighted"] = group.weighted;
    const std::filesystem::path man_path = std::filesystem::path(dir) / (label + ".manifest.json");
    std::ofstream out(man_path, std::ios::binary);
    out << man.dump(2) << '\n';
    if (!out) throw std::runtime_error("write_group: cannot write " + man_path.string());
    return man_path.string();
}

/// Magnitude thresholding: entry -> 1 when |a_ij| > t. Diagonal stays zero.
inline SymMatrix binarize(const SymMatrix& a, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("binarize: threshold must be >= 0");
    const int n = a.n();
    SymMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(a(i, j)) > threshold) out.set(i, j, 1.0);
    return out;
}

inline NetworkGroup binarize_group(const NetworkGroup& group, double threshold) {
    NetworkGroup out;
    out.weighted = false;
    out.nets.reserve(group.nets.size());
    for (const SymMatrix& net : group.nets) out.nets.push_back(binarize(net, threshold));
    return out;
}

struct SweepPoint {
    double threshold = 0.0;
    std::string estimator;
    double rate = 0.0;
    bool degenerate = false;
    std::string note;
};

struct ThresholdSweepResult {
    std::vector<double> thresholds;
    std::vector<SweepPoint> points;
};

namespace detail {

constexpr std::uint64_t kStreamSubsample = 32;

inline bool has_null_graph(const NetworkGroup& group) {
    for (const SymMatrix& net : group.nets)
        if (!(net.dense().array() != 0.0).any()) return true;
    return false;
}

}  // namespace detail

/// Binarization sweep over a threshold grid.
///
/// With two groups, each grid point binarizes both and runs the binary
/// two-sample test per estimator. With one group, each point runs the
/// subsample null protocol instead: the full binarized group is tested
/// against a uniformly drawn half-size subsample of itself, one Monte Carlo
/// iteration per subsample, averaged over subsample_replicates draws.
/// Binarization happens before subsampling. A threshold that leaves a null
/// graph in a group is flagged degenerate and skipped.
inline ThresholdSweepResult threshold_sweep(const NetworkGroup& group1,
                                            const std::optional<NetworkGroup>& group2,
                                            const std::vector<double>& thresholds,
                                            const std::vector<EstimatorConfig>& estimators,
                                            const TestConfig& base_config,
                                            int subsample_replicates = 1000) {
    if (thresholds.empty()) throw std::invalid_argument("threshold_sweep: empty grid");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (!(thresholds[i] > thresholds[i - 1]))
            throw std::invalid_argument("threshold_sweep: grid must be strictly increasing");
    if (estimators.empty()) throw std::invalid_argument("threshold_sweep: no estimators");
    if (!group1.weighted || (group2 && !group2->weighted))
        throw std::invalid_argument("threshold_sweep: weighted groups required");
    if (group2 && group1.node_count() != group2->node_count())
        throw std::invalid_argument("threshold_sweep: node count mismatch");

    ThresholdSweepResult result;
    result.thresholds = thresholds;
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
        const double t = thresholds[ti];
        const NetworkGroup bin1 = binarize_group(group1, t);
        std::optional<NetworkGroup> bin2;
        if (group2) bin2 = binarize_group(*group2, t);

        const bool degenerate =
            detail::has_null_graph(bin1) || (bin2 && detail::has_null_graph(*bin2));
        for (const EstimatorConfig& est : estimators) {
            SweepPoint point;
            point.threshold = t;
            point.estimator = to_string(est.kind);
            if (degenerate) {
                point.degenerate = true;
                point.note = "degenerate: null graphs";
                result.points.push_back(std::move(point));
                continue;
            }
            TestConfig cfg = base_config;
            cfg.estimator = est;
            cfg.weighted = false;
            if (bin2) {
                point.rate = run_two_sample_test(bin1, *bin2, cfg).rejection_rate;
            } else {
                // Subsample null protocol: full group vs. half of itself.
                const int m = bin1.size();
                const int half = m / 2;
                if (half < 1) throw std::invalid_argument("threshold_sweep: group too small to subsample");
                std::vector<double> rejections(static_cast<std::size_t>(subsample_replicates));
                parallel_for(static_cast<std::size_t>(subsample_replicates), [&](std::size_t rep) {
                    RngStream rng(base_config.seed,
                                  substream(detail::kStreamSubsample,
                                            ti * static_cast<std::size_t>(subsample_replicates) + rep));
                    const std::vector<int> picks = sample_index_subset(m, half, rng);
                    NetworkGroup sub;
                    sub.weighted = false;
                    for (int idx : picks) sub.nets.push_back(bin1.nets[static_cast<std::size_t>(idx)]);
                    TestConfig sub_cfg = cfg;
                    sub_cfg.q = 1;
                    sub_cfg.seed = rng.next_u64();
                    rejections[rep] = run_two_sample_test(bin1, sub, sub_cfg).rejection_rate;
                });
                double sum = 0.0;
                for (double r : rejections) sum += r;
                point.rate = sum / static_cast<double>(subsample_replicates);
            }
            result.points.push_back(std::move(point));
        }
    }
    return result;
}

/// Deterministic JSON view of a test result. The elapsed time is reported
/// separately (stderr in the CLI) so identical seeds produce byte-identical
/// documents.
inline nlohmann::json result_to_json(const TestResult& result) {
    nlohmann::json j;
    j["alpha"] = result.config.alpha;
    j["q"] = result.config.q;
    j["seed"] = result.config.seed;
    j["weighted"] = result.weighted;
    nlohmann::json est;
    est["kind"] = to_string(result.config.estimator.kind);
    est["k"] = result.config.estimator.communities;
    est["mnbs_c"] = result.config.estimator.mnbs_c;
    est["delta"] = result.config.estimator.delta;
    est["sigma_min"] = result.config.estimator.sigma_min;
    j["estimator"] = est;
    j["n"] = result.n;
    j["sample_sizes"] = result.sample_sizes;
    j["rejection_rate"] = result.rejection_rate;
    j["mean_theta"] = result.mean_theta;
    j["approx_p_value"] = result.approx_p_value;
    j["approx_p_value_note"] = "normal/gamma reference on the iteration-averaged statistic; approximate";
    j["critical_value"] = result.critical_value;
    j["theta_samples"] = result.theta_samples;
    if (result.gamma) {
        nlohmann::json g;
        g["groups"] = result.gamma->groups;
        g["u"] = result.gamma->u;
        g["shape"] = result.gamma->shape();
        std::vector<std::vector<double>> rho;
        for (Eigen::Index r = 0; r < result.gamma->rho.rows(); ++r) {
            std::vector<double> row;
            for (Eigen::Index c = 0; c < result.gamma->rho.cols(); ++c)
                row.push_back(result.gamma->rho(r, c));
            rho.push_back(std::move(row));
        }
        g["rho"] = rho;
        j["gamma"] = g;
    }
    return j;
}

inline nlohmann::json calibration_to_json(const CalibrationSummary& summary) {
    nlohmann::json j;
    j["replicates"] = summary.thetas.size();
    j["mean"] = summary.mean;
    j["variance"] = summary.variance;
    j["ks_distance"] = summary.ks_distance;
    j["rejection_rate"] = summary.rejection_rate;
    j["thetas"] = summary.thetas;
    return j;
}

inline nlohmann::json sweep_to_json(const ThresholdSweepResult& result) {
    nlohmann::json j;
    j["thresholds"] = result.thresholds;
    nlohmann::json points = nlohmann::json::array();
    for (const SweepPoint& p : result.points) {
        nlohmann::json item;
        item["threshold"] = p.threshold;
        item["estimator"] = p.estimator;
        item["degenerate"] = p.degenerate;
        if (p.degenerate)
            item["note"] = p.note;
        else
            item["rate"] = p.rate;
        points.push_back(std::move(item));
    }
    j["points"] = points;
    return j;
}

inline std::string sweep_to_csv(const ThresholdSweepResult& result) {
    std::string out = "threshold,estimator,rate,degenerate\n";
    for (const SweepPoint& p : result.points) {
        out += detail::format_real(p.threshold) + ',' + p.estimator + ',';
        out += p.degenerate ? "" : detail::format_real(p.rate);
        out += ',';
        out += p.degenerate ? "1" : "0";
        out += '\n';
    }
    return out;
}

}  // namespace spenet
