#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridrl/log.hpp"

namespace gridrl {

/// Bus-step samples beyond the four warning/violation thresholds, counted
/// with strict inequalities. Nested by construction of the thresholds:
/// count(v > 1.04) <= count(v > 1.03) and count(v < 0.96) <= count(v < 0.97).
struct ViolationReport {
  long long over_104 = 0;
  long long over_103 = 0;
  long long under_097 = 0;
  long long under_096 = 0;
};

/// Strict-inequality violation counts over all (step, bus) samples.
/// Throws EmptyLog.
ViolationReport violation_counts(const EpisodeLog& log);

/// Percent reduction of `other` relative to `base`, 100 * (base - other) /
/// base; 0 when base is 0 and other is 0.
double percent_reduction(double base, double other);

/// One-decimal truncation toward zero, matching how the reference results
/// table renders 280/812 as 34.4.
double truncate_one_decimal(double value);

/// Per-step sqrt(sum_bus (v - 1)^2) followed by a centered moving average
/// of `window` steps (edges average over whatever part of the window
/// exists). window = 1 returns the pointwise norm.
std::vector<double> deviation_norm_series(const EpisodeLog& log,
                                          std::size_t window);

struct VoltageEnvelope {
  std::vector<double> v_min;
  std::vector<double> v_mean;
  std::vector<double> v_max;
};

VoltageEnvelope voltage_envelope(const EpisodeLog& log);

/// Histogram of bus-step voltage samples over [0.94, 1.06] with open-ended
/// first and last bins, so total mass always equals steps x buses.
struct VoltageHistogram {
  double lo = 0.94;
  double hi = 1.06;
  double bin_width = 0.005;
  std::vector<long long> counts;  // [underflow, interior bins..., overflow]

  long long total() const;
};

VoltageHistogram voltage_histogram(const EpisodeLog& log,
                                   double bin_width = 0.005);

/// Side-by-side evaluation of a candidate run against a reference run
/// (typically trained policies vs the rule-based baseline). Count and norm
/// deltas are signed differences (candidate minus reference), so swapping
/// the arguments negates them exactly; percent reductions are relative to
/// the reference and flip sign on swap.
struct ComparisonReport {
  ViolationReport candidate;
  ViolationReport reference;
  double pct_reduction_over_104 = 0.0;
  double pct_reduction_over_103 = 0.0;
  double pct_reduction_under_097 = 0.0;
  double pct_reduction_under_096 = 0.0;
  long long delta_over_104 = 0;
  long long delta_over_103 = 0;
  long long delta_under_097 = 0;
  long long delta_under_096 = 0;

  // Mean of the per-step deviation norms, and the pooled RMS deviation over
  // every bus-step sample; the averaging convention differs, so both are
  // reported.
  double mean_norm_candidate = 0.0;
  double mean_norm_reference = 0.0;
  double mean_norm_delta = 0.0;
  double mean_norm_pct_reduction = 0.0;
  double rms_deviation_candidate = 0.0;
  double rms_deviation_reference = 0.0;
  double rms_deviation_pct_reduction = 0.0;

  // Per-action-slot mean / stddev over steps and agents, candidate then
  // reference, slot order [hvac, dhw, curtailment, phase].
  double action_mean_candidate[4] = {0, 0, 0, 0};
  double action_mean_reference[4] = {0, 0, 0, 0};
  double action_std_candidate[4] = {0, 0, 0, 0};
  double action_std_reference[4] = {0, 0, 0, 0};
  // Mean SOC trajectory summaries per device slot [hvac, dhw, battery].
  double soc_mean_candidate[3] = {0, 0, 0};
  double soc_mean_reference[3] = {0, 0, 0};
};

/// Requires matching horizon and bus count; throws ShapeMismatch.
ComparisonReport compare(const EpisodeLog& candidate,
                         const EpisodeLog& reference);

/// Aligned text table mirroring the violation-count comparison layout
/// (threshold, reference, candidate, % reduction to one truncated decimal).
std::string format_comparison_table(const ComparisonReport& report);

nlohmann::json comparison_to_json(const ComparisonReport& report);
nlohmann::json violations_to_json(const ViolationReport& report);

/// Plot-ready CSV series (step, deviation norm, v_min, v_mean, v_max).
void write_series_csv(const EpisodeLog& log, std::size_t window,
                      const std::string& path);

}  // namespace gridrl
