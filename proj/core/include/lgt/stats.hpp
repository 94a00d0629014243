#pragma once

#include <utility>
#include <vector>

namespace lgt {

// Upper-tail p-value of a chi-square statistic.
double chi_square_pvalue(double stat, int df);

// Goodness-of-fit test of observed counts against expected counts (same
// total). Bins with expected count < min_expected are pooled into their
// right neighbour (the final bin absorbs leftovers); df = bins - 1.
double chi_square_gof(const std::vector<double>& observed,
                      const std::vector<double>& expected,
                      double min_expected = 5.0);

// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1); `u` need
// not be sorted.
double ks_uniform_stat(std::vector<double> u);

// Asymptotic two-sided KS p-value with the small-sample correction
// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * d.
double ks_pvalue(double d, int n);

// Exact binomial (Clopper-Pearson) confidence interval at level 1-alpha.
std::pair<double, double> clopper_pearson(int successes, int trials,
                                          double alpha = 0.05);

// Standard error of a sample proportion.
double proportion_sigma(double p_hat, int n);

// True iff two Clopper-Pearson intervals overlap.
bool intervals_overlap(std::pair<double, double> a, std::pair<double, double> b);

}  // namespace lgt
