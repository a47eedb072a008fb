#include "biastrend/stats.hpp"

#include "biastrend/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace biastrend {
namespace stats {

double mean(const std::vector<double>& v) {
    if (v.empty())
        throw TooFewValues("mean of empty sequence");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_population(const std::vector<double>& v) {
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v)
        acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size());
}

double variance_sample(const std::vector<double>& v) {
    if (v.size() < 2)
        throw TooFewValues("sample variance needs n >= 2");
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v)
        acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

double stddev_population(const std::vector<double>& v) {
    return std::sqrt(variance_population(v));
}

double stddev_sample(const std::vector<double>& v) {
    return std::sqrt(variance_sample(v));
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]])
            ++j;
        // positions i..j (0-based) share the mean 1-based rank
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k)
            ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw LengthMismatch("pearson: size mismatch");
    if (x.size() < 2)
        throw TooFewValues("pearson needs n >= 2");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ConstantSequence("pearson: zero variance input");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(average_ranks(x), average_ranks(y));
}

double spearman_p_approx(double rho, size_t n) {
    if (n < 3)
        return 1.0;
    if (std::abs(rho) >= 1.0)
        return 0.0;
    const double dof = static_cast<double>(n - 2);
    const double t = rho * std::sqrt(dof / (1.0 - rho * rho));
    return t_two_sided_p(t, dof);
}

double spearman_p_exact(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw LengthMismatch("spearman_p_exact: size mismatch");
    const size_t n = x.size();
    if (n < 2)
        throw TooFewValues("spearman_p_exact needs n >= 2");
    const double observed = std::abs(spearman(x, y));
    std::vector<double> perm = y;
    std::sort(perm.begin(), perm.end());
    uint64_t total = 0, at_least = 0;
    const std::vector<double> rx = average_ranks(x);
    do {
        ++total;
        const double rho = pearson(rx, average_ranks(perm));
        if (std::abs(rho) >= observed - 1e-12)
            ++at_least;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(at_least) / static_cast<double>(total);
}

// Continued-fraction evaluation after Lentz; converges quickly for
// x < (a+1)/(a+b+2), with the symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
static double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny)
        d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_cdf(double t, double dof) {
    if (std::isnan(t))
        return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t))
        return t > 0 ? 1.0 : 0.0;
    const double x = dof / (t * t + dof);
    const double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double t_two_sided_p(double t, double dof) {
    const double p = 2.0 * (1.0 - t_cdf(std::abs(t), dof));
    return std::clamp(p, 0.0, 1.0);
}

double t_quantile(double p, double dof) {
    if (p <= 0.0 || p >= 1.0)
        throw UsageError("t_quantile: p must be in (0, 1)");
    double lo = -1e3, hi = 1e3;
    // t_cdf is monotone; 200 bisections reach ~1e-57 interval width
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (t_cdf(mid, dof) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ConfidenceInterval mean_ci(const std::vector<double>& v, double level) {
    if (v.empty())
        throw TooFewValues("mean_ci of empty sequence");
    if (level <= 0.0 || level >= 1.0)
        throw UsageError("mean_ci: level must be in (0, 1)");
    ConfidenceInterval ci;
    ci.n = v.size();
    ci.mean = mean(v);
    if (v.size() == 1) {
        ci.low = ci.high = ci.mean;
        return ci;
    }
    const double s = stddev_sample(v);
    const double q = t_quantile((1.0 + level) / 2.0, static_cast<double>(v.size() - 1));
    const double half = q * s / std::sqrt(static_cast<double>(v.size()));
    ci.low = ci.mean - half;
    ci.high = ci.mean + half;
    return ci;
}

TwoSampleT pooled_t_test(const std::vector<double>& s1, const std::vector<double>& s2) {
    if (s1.size() < 2 || s2.size() < 2)
        throw TooFewTargets("pooled t test needs >= 2 values per sample");
    TwoSampleT r;
    const double n1 = static_cast<double>(s1.size());
    const double n2 = static_cast<double>(s2.size());
    r.mean1 = mean(s1);
    r.mean2 = mean(s2);
    const double v1 = variance_sample(s1);
    const double v2 = variance_sample(s2);
    const double pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
    if (pooled <= 0.0)
        throw ZeroPooledVariance("pooled variance is zero");
    r.pooled_std = std::sqrt(pooled);
    r.dof = n1 + n2 - 2.0;
    r.t = (r.mean1 - r.mean2) / (r.pooled_std * std::sqrt(1.0 / n1 + 1.0 / n2));
    r.p = t_two_sided_p(r.t, r.dof);
    return r;
}

// splitmix64 seeding and xoshiro256** stepping; both are public-domain
// reference constructions.
static uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& s : s_)
        s = splitmix64(sm);
}

static inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

uint64_t Rng::next() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0)
        throw UsageError("Rng::below(0)");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % n;
}

double Rng::uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

} // namespace stats
} // namespace biastrend
