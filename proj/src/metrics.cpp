#include "gridrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gridrl/errors.hpp"

namespace gridrl {

ViolationReport violation_counts(const EpisodeLog& log) {
  if (log.num_steps == 0 || log.voltages.empty()) {
    throw EmptyLog("cannot count violations on an empty log");
  }
  ViolationReport report;
  for (double v : log.voltages) {
    if (v > 1.04) ++report.over_104;
    if (v > 1.03) ++report.over_103;
    if (v < 0.97) ++report.under_097;
    if (v < 0.96) ++report.under_096;
  }
  return report;
}

double percent_reduction(double base, double other) {
  if (base == 0.0) return 0.0;
  return 100.0 * (base - other) / base;
}

double truncate_one_decimal(double value) {
  return std::trunc(value * 10.0) / 10.0;
}

std::vector<double> deviation_norm_series(const EpisodeLog& log,
                                          std::size_t window) {
  if (window < 1) throw ConfigError("moving-average window must be >= 1");
  std::vector<double> norm(log.num_steps, 0.0);
  for (std::size_t s = 0; s < log.num_steps; ++s) {
    double sum = 0.0;
    for (std::size_t b = 0; b < log.num_buses; ++b) {
      const double d = log.voltage(s, b) - 1.0;
      sum += d * d;
    }
    norm[s] = std::sqrt(sum);
  }
  if (window == 1) return norm;

  // Centered moving average; edges shrink to the available samples.
  std::vector<double> smooth(log.num_steps, 0.0);
  const std::ptrdiff_t half_lo = static_cast<std::ptrdiff_t>((window - 1) / 2);
  const std::ptrdiff_t half_hi = static_cast<std::ptrdiff_t>(window / 2);
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(log.num_steps); ++s) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, s - half_lo);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(log.num_steps) - 1, s + half_hi);
    double sum = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) sum += norm[static_cast<std::size_t>(k)];
    smooth[static_cast<std::size_t>(s)] = sum / static_cast<double>(hi - lo + 1);
  }
  return smooth;
}

VoltageEnvelope voltage_envelope(const EpisodeLog& log) {
  if (log.num_steps == 0) throw EmptyLog("cannot summarize an empty log");
  VoltageEnvelope env;
  env.v_min.resize(log.num_steps);
  env.v_mean.resize(log.num_steps);
  env.v_max.resize(log.num_steps);
  for (std::size_t s = 0; s < log.num_steps; ++s) {
    double lo = log.voltage(s, 0);
    double hi = lo;
    double sum = 0.0;
    for (std::size_t b = 0; b < log.num_buses; ++b) {
      const double v = log.voltage(s, b);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    env.v_min[s] = lo;
    env.v_max[s] = hi;
    env.v_mean[s] = sum / static_cast<double>(log.num_buses);
  }
  return env;
}

long long VoltageHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

VoltageHistogram voltage_histogram(const EpisodeLog& log, double bin_width) {
  if (bin_width <= 0.0) throw ConfigError("bin width must be positive");
  VoltageHistogram hist;
  hist.bin_width = bin_width;
  const int interior =
      static_cast<int>(std::ceil((hist.hi - hist.lo) / bin_width - 1e-12));
  hist.counts.assign(static_cast<std::size_t>(interior) + 2, 0);
  for (double v : log.voltages) {
    if (v < hist.lo) {
      ++hist.counts.front();
    } else if (v >= hist.hi) {
      ++hist.counts.back();
    } else {
      const int bin = static_cast<int>((v - hist.lo) / bin_width);
      ++hist.counts[static_cast<std::size_t>(std::min(bin, interior - 1)) + 1];
    }
  }
  return hist;
}

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pooled_rms_deviation(const EpisodeLog& log) {
  double sum = 0.0;
  for (double v : log.voltages) sum += (v - 1.0) * (v - 1.0);
  return std::sqrt(sum / static_cast<double>(log.voltages.size()));
}

void action_summaries(const EpisodeLog& log, double mean_out[4],
                      double std_out[4]) {
  for (std::size_t slot = 0; slot < 4; ++slot) {
    double sum = 0.0;
    double sq = 0.0;
    const double n = static_cast<double>(log.num_steps * log.num_agents);
    for (std::size_t s = 0; s < log.num_steps; ++s) {
      for (std::size_t a = 0; a < log.num_agents; ++a) {
        const double x = log.action(s, a, slot);
        sum += x;
        sq += x * x;
      }
    }
    mean_out[slot] = sum / n;
    std_out[slot] = std::sqrt(std::max(0.0, sq / n - mean_out[slot] * mean_out[slot]));
  }
}

void soc_summaries(const EpisodeLog& log, double mean_out[3]) {
  for (std::size_t slot = 0; slot < 3; ++slot) {
    double sum = 0.0;
    for (std::size_t s = 0; s < log.num_steps; ++s) {
      for (std::size_t a = 0; a < log.num_agents; ++a) {
        sum += log.soc(s, a, slot);
      }
    }
    mean_out[slot] = sum / static_cast<double>(log.num_steps * log.num_agents);
  }
}

}  // namespace

ComparisonReport compare(const EpisodeLog& candidate,
                         const EpisodeLog& reference) {
  if (candidate.num_steps != reference.num_steps ||
      candidate.num_buses != reference.num_buses) {
    throw ShapeMismatch("compared logs must share horizon and bus count");
  }
  ComparisonReport report;
  report.candidate = violation_counts(candidate);
  report.reference = violation_counts(reference);

  report.delta_over_104 = report.candidate.over_104 - report.reference.over_104;
  report.delta_over_103 = report.candidate.over_103 - report.reference.over_103;
  report.delta_under_097 = report.candidate.under_097 - report.reference.under_097;
  report.delta_under_096 = report.candidate.under_096 - report.reference.under_096;
  report.pct_reduction_over_104 = percent_reduction(
      static_cast<double>(report.reference.over_104), static_cast<double>(report.candidate.over_104));
  report.pct_reduction_over_103 = percent_reduction(
      static_cast<double>(report.reference.over_103), static_cast<double>(report.candidate.over_103));
  report.pct_reduction_under_097 = percent_reduction(
      static_cast<double>(report.reference.under_097), static_cast<double>(report.candidate.under_097));
  report.pct_reduction_under_096 = percent_reduction(
      static_cast<double>(report.reference.under_096), static_cast<double>(report.candidate.under_096));

  report.mean_norm_candidate = mean_of(deviation_norm_series(candidate, 1));
  report.mean_norm_reference = mean_of(deviation_norm_series(reference, 1));
  report.mean_norm_delta = report.mean_norm_candidate - report.mean_norm_reference;
  report.mean_norm_pct_reduction =
      percent_reduction(report.mean_norm_reference, report.mean_norm_candidate);
  report.rms_deviation_candidate = pooled_rms_deviation(candidate);
  report.rms_deviation_reference = pooled_rms_deviation(reference);
  report.rms_deviation_pct_reduction = percent_reduction(
      report.rms_deviation_reference, report.rms_deviation_candidate);

  action_summaries(candidate, report.action_mean_candidate, report.action_std_candidate);
  action_summaries(reference, report.action_mean_reference, report.action_std_reference);
  soc_summaries(candidate, report.soc_mean_candidate);
  soc_summaries(reference, report.soc_mean_reference);
  return report;
}

std::string format_comparison_table(const ComparisonReport& r) {
  char buf[128];
  std::string out;
  out += "threshold    reference   candidate   % reduction\n";
  const struct {
    const char* label;
    long long ref;
    long long cand;
    double pct;
  } rows[] = {
      {"v > 1.04", r.reference.over_104, r.candidate.over_104, r.pct_reduction_over_104},
      {"v > 1.03", r.reference.over_103, r.candidate.over_103, r.pct_reduction_over_103},
      {"v < 0.97", r.reference.under_097, r.candidate.under_097, r.pct_reduction_under_097},
      {"v < 0.96", r.reference.under_096, r.candidate.under_096, r.pct_reduction_under_096},
  };
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %9lld   %9lld   %11.1f\n", row.label,
                  row.ref, row.cand, truncate_one_decimal(row.pct));
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "mean deviation norm: reference %.6f, candidate %.6f (%.2f%% reduction)\n",
                r.mean_norm_reference, r.mean_norm_candidate, r.mean_norm_pct_reduction);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "pooled RMS deviation: reference %.6f, candidate %.6f (%.2f%% reduction)\n",
                r.rms_deviation_reference, r.rms_deviation_candidate,
                r.rms_deviation_pct_reduction);
  out += buf;
  return out;
}

nlohmann::json violations_to_json(const ViolationReport& report) {
  return {{"over_1.04", report.over_104},
          {"over_1.03", report.over_103},
          {"under_0.97", report.under_097},
          {"under_0.96", report.under_096}};
}

nlohmann::json comparison_to_json(const ComparisonReport& r) {
  nlohmann::json j;
  j["candidate"] = violations_to_json(r.candidate);
  j["reference"] = violations_to_json(r.reference);
  j["pct_reduction"] = {{"over_1.04", r.pct_reduction_over_104},
                        {"over_1.03", r.pct_reduction_over_103},
                        {"under_0.97", r.pct_reduction_under_097},
                        {"under_0.96", r.pct_reduction_under_096}};
  j["delta"] = {{"over_1.04", r.delta_over_104},
                {"over_1.03", r.delta_over_103},
                {"under_0.97", r.delta_under_097},
                {"under_0.96", r.delta_under_096}};
  j["deviation_norm"] = {{"mean_candidate", r.mean_norm_candidate},
                         {"mean_reference", r.mean_norm_reference},
                         {"delta", r.mean_norm_delta},
                         {"pct_reduction_mean", r.mean_norm_pct_reduction},
                         {"rms_candidate", r.rms_deviation_candidate},
                         {"rms_reference", r.rms_deviation_reference},
                         {"pct_reduction_rms", r.rms_deviation_pct_reduction}};
  j["actions"] = {{"mean_candidate", r.action_mean_candidate},
                  {"mean_reference", r.action_mean_reference},
                  {"std_candidate", r.action_std_candidate},
                  {"std_reference", r.action_std_reference}};
  j["soc"] = {{"mean_candidate", r.soc_mean_candidate},
              {"mean_reference", r.soc_mean_reference}};
  return j;
}

void write_series_csv(const EpisodeLog& log, std::size_t window,
                      const std::string& path) {
  const std::vector<double> norm = deviation_norm_series(log, window);
  const VoltageEnvelope env = voltage_envelope(log);
  std::ofstream out(path);
  out << "step,deviation_norm,v_min,v_mean,v_max\n";
  char buf[160];
  for (std::size_t s = 0; s < log.num_steps; ++s) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g\n", s, norm[s],
                  env.v_min[s], env.v_mean[s], env.v_max[s]);
    out << buf;
  }
}

}  // namespace gridrl
