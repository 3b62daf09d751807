#pragma once

#include <cstddef>
#include <vector>

namespace coopstab {

/// Piecewise-constant map t -> p. values[k] is active on
/// [switch_times[k-1], switch_times[k]) with switch_times[-1] = t0; the last
/// value holds forever.
class SwitchingSignal {
 public:
  /// Throws std::invalid_argument unless switch times are strictly
  /// increasing and after t0, values has one more entry than switch_times,
  /// every value is >= 1, and consecutive values differ.
  SwitchingSignal(double t0, std::vector<double> switch_times, std::vector<int> values);
  static SwitchingSignal constant(int p, double t0 = 0.0);

  double t0() const { return t0_; }
  const std::vector<double>& switch_times() const { return switch_times_; }
  const std::vector<int>& values() const { return values_; }
  int max_value() const;

  /// Right-continuous lookup; throws std::out_of_range for t < t0.
  int value_at(double t) const;
  /// Index k of the piece containing t (same convention as value_at).
  std::size_t piece_index(double t) const;

 private:
  double t0_;
  std::vector<double> switch_times_;
  std::vector<int> values_;
};

/// sigma = 1 on [sT, (s + 1/2)T), sigma = 2 on [(s + 1/2)T, (s + 1)T).
/// Switch instants k T / 2 strictly before t_end are materialized.
SwitchingSignal periodic_two_phase(double period, double t_end, double t0 = 0.0);

struct AdtSpec {
  double tau_d = 1.0;
  double n0 = 1.0;
};

/// Result of checking N_sigma(t, T) <= N0 + (T - t) / tau_d, where N_sigma
/// counts switches in (t, T].
struct AdtReport {
  bool valid = true;
  /// sup over intervals of N_sigma(t, T) - (T - t) / tau_d; the signal is
  /// valid iff this does not exceed N0.
  double worst_excess = 0.0;
  /// The maximizing interval is (worst_t^-, worst_T]: it opens just before
  /// the switch at worst_t, so that switch is counted.
  double worst_t = 0.0;
  double worst_T = 0.0;
  int worst_count = 0;
  std::size_t switches_checked = 0;
  bool truncated = false;  // switches after the horizon were dropped
  std::size_t switches_dropped = 0;
};

/// Exact check over the finite set of critical intervals. Counting
/// intervals that start just before switch k and end at switch j attains the
/// supremum, so only O(m^2) pairs over the m switches in the horizon are
/// needed.
AdtReport validate_adt(const SwitchingSignal& signal, const AdtSpec& spec, double horizon);

/// ln(mu0) / lambda0. Throws std::invalid_argument for mu0 < 1 or lambda0 <= 0.
double min_dwell_time(double mu0, double lambda0);

}  // namespace coopstab
