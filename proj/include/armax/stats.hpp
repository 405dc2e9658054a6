#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "armax/errors.hpp"

namespace armax {

/// Empirical autocorrelations r(0..max_lag) with r(i) averaged over the
/// T - i full-overlap products y_k * y_{k-i} (unbiased normalization).
/// Consumers treat r(-i) as r(i).
inline std::vector<double> autocorrelation(const std::vector<double>& signal,
                                           std::size_t max_lag) {
  if (signal.empty()) throw DimensionError("autocorrelation: empty signal");
  if (signal.size() <= max_lag)
    throw DimensionError("autocorrelation: need signal length > max_lag");
  std::vector<double> r(max_lag + 1, 0.0);
  const std::size_t T = signal.size();
  for (std::size_t i = 0; i <= max_lag; ++i) {
    double acc = 0.0;
    for (std::size_t k = i; k < T; ++k) acc += signal[k] * signal[k - i];
    r[i] = acc / static_cast<double>(T - i);
  }
  return r;
}

/// Normalized autocorrelation coefficients r(i)/r(0) of the mean-removed
/// signal, for whiteness checks.
inline std::vector<double> autocorrelation_coefficients(
    const std::vector<double>& signal, std::size_t max_lag) {
  if (signal.empty()) throw DimensionError("autocorrelation: empty signal");
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(signal.size());
  std::vector<double> centered(signal.size());
  for (std::size_t k = 0; k < signal.size(); ++k) centered[k] = signal[k] - mean;
  std::vector<double> r = autocorrelation(centered, max_lag);
  std::vector<double> rho(max_lag + 1, 0.0);
  if (r[0] > 0.0)
    for (std::size_t i = 0; i <= max_lag; ++i) rho[i] = r[i] / r[0];
  return rho;
}

/// Symmetric Toeplitz matrix built from autocovariances r(0..L).
inline Eigen::MatrixXd toeplitz_from_autocov(const std::vector<double>& r) {
  const auto L = static_cast<Eigen::Index>(r.size());
  Eigen::MatrixXd t(L, L);
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = 0; j < L; ++j)
      t(i, j) = r[static_cast<std::size_t>(std::abs(i - j))];
  return t;
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw DimensionError("median: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  std::nth_element(values.begin(), values.begin() + mid - 1, values.end());
  return 0.5 * (values[mid - 1] + hi);
}

inline double mean(const std::vector<double>& values) {
  if (values.empty()) throw DimensionError("mean: empty input");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

}  // namespace armax
