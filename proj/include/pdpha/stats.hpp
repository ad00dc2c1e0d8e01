#pragma once

#include <cstddef>
#include <vector>

namespace pdpha {

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t distribution with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

struct PairedTTest {
    double mean_diff = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;   // one-sided, H1: mean difference < 0
    bool degenerate = false;  // zero-variance differences
};

// One-sided paired t-test on diffs d_i = candidate_i - reference_i with
// H1: mean(d) < 0. Zero-variance cases resolve to p=0 (all negative) or p=1.
PairedTTest one_sided_paired_ttest(const std::vector<double>& candidate,
                                   const std::vector<double>& reference);

}  // namespace pdpha
