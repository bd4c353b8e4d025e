#pragma once

#include <span>

namespace reformkit::stats {

double mean(std::span<double const> xs);
// Unbiased (n - 1) sample variance.
double sample_variance(std::span<double const> xs);
// Population (n) standard deviation.
double population_stddev(std::span<double const> xs);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double df1 = 0.0;
    double df2 = 0.0;  // unused by the t-test
    // The statistic diverged: zero spread with different centers.
    bool infinite = false;
};

// Two-group Levene test with mean centering. W follows F(1, n_a + n_b - 2).
// Both groups need at least two observations (std::invalid_argument otherwise).
// No spread at all in the absolute deviations gives W = 0, p = 1.
TestResult levene_test(std::span<double const> a, std::span<double const> b);

// Two-sided two-sample t-test: Student's pooled form when equal_variance,
// Welch otherwise. Zero variance with equal means gives t = 0, p = 1; zero
// variance with different means sets `infinite` (t = +-inf, p = 0).
TestResult t_test(std::span<double const> a, std::span<double const> b, bool equal_variance);

// Survival functions used for the p-values.
double f_sf(double x, double df1, double df2);
double t_two_sided_p(double t, double df);

}  // namespace reformkit::stats
