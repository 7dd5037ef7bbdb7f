// Minimal library walkthrough: draw two groups from slightly different
// two-block models, test them, and print the decision inputs.

#include <iostream>

#include "spenet/spenet.hpp"

int main() {
    using namespace spenet;

    const int n = 200, m = 50;
    const double shift = 1.0 / (5.0 * std::log(static_cast<double>(m)));

    RngStream rng(2024);
    const SymMatrix p_null = sbm_prob_matrix({n, two_block_membership_thirds(n), two_block_matrix(0.0)});
    const SymMatrix p_alt = sbm_prob_matrix({n, two_block_membership_thirds(n), two_block_matrix(shift)});
    const NetworkGroup g1 = sample_binary_group(p_null, m, rng);
    const NetworkGroup g2 = sample_binary_group(p_alt, m, rng);

    TestConfig cfg;
    cfg.q = 200;
    cfg.seed = 7;
    cfg.estimator.kind = EstimatorKind::Sbm;
    cfg.estimator.communities = 2;

    const TestResult res = run_two_sample_test(g1, g2, cfg);
    std::cout << "n=" << res.n << " m1=" << res.sample_sizes[0] << " m2=" << res.sample_sizes[1]
              << "\nrejection_rate=" << res.rejection_rate << " mean_theta=" << res.mean_theta
              << "\ncritical_value=" << res.critical_value << "\n";

    const PowerConditionReport report = power_condition_check(p_null, p_alt, m, m);
    std::cout << "signal triples: a=" << report.a << " b=" << report.b
              << " condition_i=" << report.condition_i << " condition_ii=" << report.condition_ii
              << "\n";
    return 0;
}
