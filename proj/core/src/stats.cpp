#include "lgt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>

namespace lgt {

double chi_square_pvalue(double stat, int df) {
  if (df <= 0) throw std::invalid_argument("chi_square_pvalue: df <= 0");
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double chi_square_gof(const std::vector<double>& observed,
                      const std::vector<double>& expected,
                      double min_expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  std::vector<double> obs, exp;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (obs.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }
  if (obs.size() < 2)
    throw std::invalid_argument("chi_square_gof: fewer than 2 usable bins");
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    double diff = obs[i] - exp[i];
    stat += diff * diff / exp[i];
  }
  return chi_square_pvalue(stat, static_cast<int>(obs.size()) - 1);
}

double ks_uniform_stat(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const int n = static_cast<int>(u.size());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    d = std::max(d, (i + 1.0) / n - u[i]);
    d = std::max(d, u[i] - static_cast<double>(i) / n);
  }
  return d;
}

double ks_pvalue(double d, int n) {
  double sn = std::sqrt(static_cast<double>(n));
  double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

std::pair<double, double> clopper_pearson(int successes, int trials,
                                          double alpha) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("clopper_pearson: bad counts");
  double lo = 0.0, hi = 1.0;
  if (successes > 0) {
    boost::math::beta_distribution<double> b(successes, trials - successes + 1);
    lo = boost::math::quantile(b, alpha / 2.0);
  }
  if (successes < trials) {
    boost::math::beta_distribution<double> b(successes + 1, trials - successes);
    hi = boost::math::quantile(b, 1.0 - alpha / 2.0);
  }
  return {lo, hi};
}

double proportion_sigma(double p_hat, int n) {
  return std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) / n);
}

bool intervals_overlap(std::pair<double, double> a,
                       std::pair<double, double> b) {
  return a.first <= b.second && b.first <= a.second;
}

}  // namespace lgt
