#include "coopstab/switching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coopstab {

SwitchingSignal::SwitchingSignal(double t0, std::vector<double> switch_times,
                                 std::vector<int> values)
    : t0_(t0), switch_times_(std::move(switch_times)), values_(std::move(values)) {
  if (values_.size() != switch_times_.size() + 1) {
    throw std::invalid_argument("switching signal needs len(values) == len(switch_times) + 1");
  }
  double prev = t0_;
  for (double t : switch_times_) {
    if (!(t > prev)) {
      throw std::invalid_argument("switch times must be strictly increasing and after t0");
    }
    prev = t;
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (values_[k] < 1) throw std::invalid_argument("topology indices start at 1");
    if (k > 0 && values_[k] == values_[k - 1]) {
      throw std::invalid_argument("consecutive values must differ");
    }
  }
}

SwitchingSignal SwitchingSignal::constant(int p, double t0) { return {t0, {}, {p}}; }

int SwitchingSignal::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

std::size_t SwitchingSignal::piece_index(double t) const {
  if (t < t0_) throw std::out_of_range("switching signal queried before t0");
  // First switch strictly greater than t; pieces are [t_k, t_{k+1}).
  const auto it = std::upper_bound(switch_times_.begin(), switch_times_.end(), t);
  return static_cast<std::size_t>(it - switch_times_.begin());
}

int SwitchingSignal::value_at(double t) const { return values_[piece_index(t)]; }

SwitchingSignal periodic_two_phase(double period, double t_end, double t0) {
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
  if (!(t_end > t0)) throw std::invalid_argument("t_end must be after t0");
  std::vector<double> times;
  std::vector<int> values{1};
  const double half = period / 2.0;
  for (long k = 1;; ++k) {
    const double t = t0 + static_cast<double>(k) * half;
    if (!(t < t_end)) break;
    times.push_back(t);
    values.push_back(k % 2 == 0 ? 1 : 2);
  }
  return {t0, std::move(times), std::move(values)};
}

AdtReport validate_adt(const SwitchingSignal& signal, const AdtSpec& spec, double horizon) {
  if (!(spec.tau_d > 0.0)) throw std::invalid_argument("tau_d must be positive");
  if (spec.n0 < 0.0) throw std::invalid_argument("N0 must be nonnegative");
  if (horizon < signal.t0()) throw std::invalid_argument("horizon before t0");

  const auto& all = signal.switch_times();
  const auto last = std::upper_bound(all.begin(), all.end(), horizon);
  const std::vector<double> times(all.begin(), last);

  AdtReport report;
  report.switches_checked = times.size();
  report.switches_dropped = all.size() - times.size();
  report.truncated = report.switches_dropped > 0;
  report.worst_t = report.worst_T = signal.t0();

  // excess(k, j) = (j - k + 1) - (t_j - t_k) / tau_d
  //             = (j + 1 - t_j / tau_d) + (t_k / tau_d - k); keep the best k <= j.
  double best_left = -INFINITY;
  std::size_t best_k = 0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double left = times[j] / spec.tau_d - static_cast<double>(j);
    if (left > best_left) {
      best_left = left;
      best_k = j;
    }
    const double count = static_cast<double>(j - best_k + 1);
    const double excess = count - (times[j] - times[best_k]) / spec.tau_d;
    if (excess > report.worst_excess || report.worst_count == 0) {
      report.worst_excess = excess;
      report.worst_t = times[best_k];
      report.worst_T = times[j];
      report.worst_count = static_cast<int>(j - best_k + 1);
    }
  }
  const double slack = 1e-9 * std::max(1.0, static_cast<double>(report.worst_count));
  report.valid = report.worst_excess <= spec.n0 + slack;
  return report;
}

double min_dwell_time(double mu0, double lambda0) {
  if (!(mu0 >= 1.0)) throw std::invalid_argument("mu0 must be >= 1");
  if (!(lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be positive");
  return std::log(mu0) / lambda0;
}

}  // namespace coopstab
