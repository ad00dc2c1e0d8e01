#include "pdpha/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "pdpha/common.hpp"

namespace pdpha {

namespace {

// Continued-fraction evaluation for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    require(a > 0 && b > 0, "incomplete_beta: a and b must be positive");
    require(x >= 0.0 && x <= 1.0, "incomplete_beta: x must be in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double lnbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - lnbeta);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    require(dof > 0, "student_t_cdf: dof must be positive");
    if (t == 0.0) return 0.5;
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

PairedTTest one_sided_paired_ttest(const std::vector<double>& candidate,
                                   const std::vector<double>& reference) {
    require(candidate.size() == reference.size(), "paired t-test: size mismatch");
    require(candidate.size() >= 2, "paired t-test: need at least 2 pairs");
    const size_t m = candidate.size();
    std::vector<double> d(m);
    double mean = 0.0;
    for (size_t i = 0; i < m; ++i) {
        d[i] = candidate[i] - reference[i];
        mean += d[i];
    }
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double di : d) ss += (di - mean) * (di - mean);
    const double var = ss / static_cast<double>(m - 1);

    PairedTTest res;
    res.mean_diff = mean;
    if (var == 0.0) {
        res.degenerate = true;
        res.t_stat = 0.0;
        res.p_value = mean < 0.0 ? 0.0 : 1.0;
        return res;
    }
    res.t_stat = mean / std::sqrt(var / static_cast<double>(m));
    res.p_value = student_t_cdf(res.t_stat, static_cast<double>(m - 1));
    return res;
}

}  // namespace pdpha
