#pragma once

#include <cstdint>
#include <vector>

namespace biastrend {
namespace stats {

double mean(const std::vector<double>& v);
// Population variance (1/n). Throws TooFewValues on empty input.
double variance_population(const std::vector<double>& v);
// Sample variance (1/(n-1)). Throws TooFewValues for n < 2.
double variance_sample(const std::vector<double>& v);
double stddev_population(const std::vector<double>& v);
double stddev_sample(const std::vector<double>& v);

// Average ranks, 1-based; ties share the mean of their rank positions.
std::vector<double> average_ranks(const std::vector<double>& v);

// Pearson correlation. Throws ConstantSequence when either input has zero
// variance, LengthMismatch on unequal sizes, TooFewValues for n < 2.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Spearman rank correlation: Pearson over average ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Two-sided p for Spearman rho via the t approximation
// t = rho * sqrt((n-2) / (1 - rho^2)); returns 0 for |rho| = 1, 1 for n < 3.
double spearman_p_approx(double rho, size_t n);

// Exact two-sided permutation p for small n (enumerates all n! rankings
// of y against x); intended for n <= 10.
double spearman_p_exact(const std::vector<double>& x, const std::vector<double>& y);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

// Student t CDF with dof degrees of freedom.
double t_cdf(double t, double dof);

// Two-sided tail probability 2 * (1 - F(|t|)).
double t_two_sided_p(double t, double dof);

// Inverse CDF by bisection on t_cdf.
double t_quantile(double p, double dof);

struct ConfidenceInterval {
    double mean = 0.0;
    double low = 0.0;
    double high = 0.0;
    size_t n = 0;
};

// mean +/- t_{(1+level)/2, n-1} * s / sqrt(n). For n == 1 returns the
// degenerate interval [x, x].
ConfidenceInterval mean_ci(const std::vector<double>& v, double level);

// Welford-free two-sample pooled t statistic, equal-variance form.
// Throws TooFewTargets when either sample has < 2 values and
// ZeroPooledVariance when the pooled variance is zero.
struct TwoSampleT {
    double t = 0.0;
    double p = 0.0; // two-sided
    double dof = 0.0;
    double mean1 = 0.0;
    double mean2 = 0.0;
    double pooled_std = 0.0;
};
TwoSampleT pooled_t_test(const std::vector<double>& s1, const std::vector<double>& s2);

// xoshiro-style deterministic generator for sampling decisions; identical
// streams on every platform for a given seed.
class Rng {
  public:
    explicit Rng(uint64_t seed);
    uint64_t next();
    // Uniform in [0, n) without modulo bias.
    uint64_t below(uint64_t n);
    double uniform01();

  private:
    uint64_t s_[4];
};

} // namespace stats
} // namespace biastrend
