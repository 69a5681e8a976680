#include "redline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "redline/env.hpp"
#include "redline/errors.hpp"

namespace redline {

double step_ground_truth_penalty(const StepTrace& trace) {
  double count = 0.0;
  for (std::uint8_t f : trace.compromised_union) count += f ? 1.0 : 0.0;
  return -count;
}

double episode_ground_truth_score(const std::vector<StepTrace>& traces) {
  if (traces.empty()) throw EmptyEpisode("episode with no steps");
  double sum = 0.0;
  for (const StepTrace& t : traces) sum += step_ground_truth_penalty(t);
  return sum / static_cast<double>(traces.size());
}

std::vector<double> detrend_differences(const std::vector<double>& curve) {
  if (curve.size() < 2) throw TooShort("detrend needs at least 2 points");
  std::vector<double> diffs(curve.size() - 1);
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    diffs[i] = curve[i + 1] - curve[i];
  }
  return diffs;
}

namespace {

// quantile by linear interpolation of order statistics; data must be sorted
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double iqr_of_range(const double* begin, std::size_t n) {
  std::vector<double> sorted(begin, begin + n);
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
}

}  // namespace

double iqr(const std::vector<double>& values) {
  if (values.size() < 2) throw TooShort("iqr needs at least 2 values");
  return iqr_of_range(values.data(), values.size());
}

double dispersion_variability(const std::vector<double>& curve, int window) {
  if (window < 2) throw BadWindow("window must be >= 2");
  std::vector<double> diffs = detrend_differences(curve);
  if (diffs.size() < 2) throw TooShort("curve too short for a window IQR");
  const std::size_t w = static_cast<std::size_t>(window);
  if (w >= diffs.size()) return iqr_of_range(diffs.data(), diffs.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start + w <= diffs.size(); ++start) {
    sum += iqr_of_range(diffs.data() + start, w);
    ++count;
  }
  return sum / static_cast<double>(count);
}

double dispersion_variability(const CurveSeries& curve, int window) {
  return dispersion_variability(curve.values, window);
}

}  // namespace redline
