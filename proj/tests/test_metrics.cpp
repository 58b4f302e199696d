#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gridrl/errors.hpp"
#include "gridrl/metrics.hpp"
#include "gridrl/rng.hpp"

using namespace gridrl;

namespace {

EpisodeLog log_from_voltages(std::size_t steps, std::size_t buses,
                             double fill = 1.0) {
  EpisodeLog log;
  log.dt_hours = 0.25;
  log.num_steps = steps;
  log.num_buses = buses;
  log.num_agents = 2;
  log.voltages.assign(steps * buses, fill);
  log.actions.assign(steps * 2 * 4, 0.0);
  log.socs.assign(steps * 2 * 3, 0.0);
  log.rewards.assign(steps * 2, 0.0);
  return log;
}

}  // namespace

TEST_CASE("violation counts") {
  SUBCASE("all-nominal log counts nothing") {
    const ViolationReport r = violation_counts(log_from_voltages(10, 33));
    CHECK(r.over_104 == 0);
    CHECK(r.over_103 == 0);
    CHECK(r.under_097 == 0);
    CHECK(r.under_096 == 0);
  }
  SUBCASE("a 1.045 sample trips both upper thresholds") {
    EpisodeLog log = log_from_voltages(4, 3);
    log.voltages[5] = 1.045;
    const ViolationReport r = violation_counts(log);
    CHECK(r.over_104 == 1);
    CHECK(r.over_103 == 1);
    CHECK(r.under_097 == 0);
    CHECK(r.under_096 == 0);
  }
  SUBCASE("thresholds are strict") {
    EpisodeLog log = log_from_voltages(1, 4);
    log.voltages = {1.04, 1.03, 0.97, 0.96};
    const ViolationReport r = violation_counts(log);
    CHECK(r.over_104 == 0);
    CHECK(r.over_103 == 1);  // only the 1.04 sample exceeds 1.03
    CHECK(r.under_097 == 1);
    CHECK(r.under_096 == 0);
  }
  SUBCASE("empty log throws") {
    EpisodeLog log;
    CHECK_THROWS_AS(violation_counts(log), EmptyLog);
  }
  SUBCASE("nesting holds on fuzzed logs") {
    RandomStream rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      EpisodeLog log = log_from_voltages(20, 7);
      for (double& v : log.voltages) v = rng.uniform(0.9, 1.1);
      const ViolationReport r = violation_counts(log);
      CHECK(r.over_104 <= r.over_103);
      CHECK(r.under_096 <= r.under_097);
    }
  }
}

TEST_CASE("percent reduction reproduces the reference pair") {
  const double pct = percent_reduction(812.0, 532.0);
  CHECK(truncate_one_decimal(pct) == doctest::Approx(34.4));
  CHECK(percent_reduction(100.0, 50.0) == doctest::Approx(50.0));
  CHECK(percent_reduction(0.0, 0.0) == 0.0);
}

TEST_CASE("deviation norm series") {
  SUBCASE("all ones gives a zero series") {
    const auto series = deviation_norm_series(log_from_voltages(5, 33), 1);
    for (double x : series) CHECK(x == 0.0);
  }
  SUBCASE("a single 1.03 bus gives 0.03 at window 1") {
    EpisodeLog log = log_from_voltages(3, 33);
    log.voltages[1 * 33 + 7] = 1.03;
    const auto series = deviation_norm_series(log, 1);
    CHECK(series[0] == 0.0);
    CHECK(series[1] == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(series[2] == 0.0);
  }
  SUBCASE("full-length window yields the constant global mean") {
    EpisodeLog log = log_from_voltages(6, 2);
    RandomStream rng(2);
    for (double& v : log.voltages) v = rng.uniform(0.95, 1.05);
    const auto raw = deviation_norm_series(log, 1);
    const double mean =
        std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(raw.size());
    const auto smooth = deviation_norm_series(log, 2 * log.num_steps + 1);
    for (double x : smooth) CHECK(x == doctest::Approx(mean).epsilon(1e-12));
  }
  SUBCASE("window 1 equals the pointwise norm") {
    EpisodeLog log = log_from_voltages(9, 5);
    RandomStream rng(3);
    for (double& v : log.voltages) v = rng.uniform(0.9, 1.1);
    const auto a = deviation_norm_series(log, 1);
    for (std::size_t s = 0; s < log.num_steps; ++s) {
      double sum = 0.0;
      for (std::size_t b = 0; b < log.num_buses; ++b) {
        sum += (log.voltage(s, b) - 1.0) * (log.voltage(s, b) - 1.0);
      }
      CHECK(a[s] == doctest::Approx(std::sqrt(sum)).epsilon(1e-12));
    }
  }
}

TEST_CASE("voltage envelope order statistics") {
  EpisodeLog log = log_from_voltages(2, 3);
  log.voltages = {1.0, 1.0, 1.0, 0.95, 0.98, 1.02};
  const VoltageEnvelope env = voltage_envelope(log);
  CHECK(env.v_min[0] == 1.0);
  CHECK(env.v_mean[0] == 1.0);
  CHECK(env.v_max[0] == 1.0);
  CHECK(env.v_min[1] == doctest::Approx(0.95));
  CHECK(env.v_max[1] == doctest::Approx(1.02));
  CHECK(env.v_mean[1] == doctest::Approx((0.95 + 0.98 + 1.02) / 3.0));
}

TEST_CASE("voltage histogram") {
  SUBCASE("mass lands in the bin containing the sample") {
    EpisodeLog log = log_from_voltages(10, 4);  // 40 samples at exactly 1.0
    const VoltageHistogram h = voltage_histogram(log);
    CHECK(h.total() == 40);
    const int bin = static_cast<int>((1.0 - h.lo) / h.bin_width);
    CHECK(h.counts[static_cast<std::size_t>(bin) + 1] == 40);
  }
  SUBCASE("total mass is conserved with out-of-range samples") {
    EpisodeLog log = log_from_voltages(1, 5);
    log.voltages = {0.5, 0.95, 1.0, 1.05, 1.5};
    const VoltageHistogram h = voltage_histogram(log);
    CHECK(h.total() == 5);
    CHECK(h.counts.front() == 1);  // 0.5 underflows
    CHECK(h.counts.back() == 1);   // 1.5 overflows
  }
  SUBCASE("uniform voltages give approximately flat interior bins") {
    EpisodeLog log = log_from_voltages(5000, 4);
    RandomStream rng(17);
    for (double& v : log.voltages) v = rng.uniform(0.94, 1.06);
    const VoltageHistogram h = voltage_histogram(log, 0.005);
    const std::size_t interior = h.counts.size() - 2;
    const double expected =
        static_cast<double>(h.total()) / static_cast<double>(interior);
    double chi2 = 0.0;
    for (std::size_t i = 1; i + 1 < h.counts.size(); ++i) {
      const double diff = static_cast<double>(h.counts[i]) - expected;
      chi2 += diff * diff / expected;
    }
    // 24 bins -> 23 dof; 99.9th percentile is ~49.7.
    CHECK(chi2 < 55.0);
  }
}

TEST_CASE("comparison report") {
  SUBCASE("identical logs give zero deltas") {
    EpisodeLog log = log_from_voltages(20, 5);
    RandomStream rng(8);
    for (double& v : log.voltages) v = rng.uniform(0.93, 1.07);
    const ComparisonReport r = compare(log, log);
    CHECK(r.delta_over_104 == 0);
    CHECK(r.delta_under_096 == 0);
    CHECK(r.pct_reduction_over_104 == 0.0);
    CHECK(r.mean_norm_delta == 0.0);
    CHECK(r.mean_norm_pct_reduction == 0.0);
  }
  SUBCASE("halved deviations report a 50% reduction") {
    EpisodeLog reference = log_from_voltages(10, 3);
    EpisodeLog candidate = log_from_voltages(10, 3);
    for (std::size_t i = 0; i < reference.voltages.size(); ++i) {
      reference.voltages[i] = 1.0 + 0.04;
      candidate.voltages[i] = 1.0 + 0.02;
    }
    const ComparisonReport r = compare(candidate, reference);
    CHECK(r.mean_norm_pct_reduction == doctest::Approx(50.0).epsilon(1e-9));
  }
  SUBCASE("swapping the arguments negates the difference metrics") {
    EpisodeLog a = log_from_voltages(30, 6);
    EpisodeLog b = log_from_voltages(30, 6);
    RandomStream rng(9);
    for (double& v : a.voltages) v = rng.uniform(0.93, 1.07);
    for (double& v : b.voltages) v = rng.uniform(0.93, 1.07);
    const ComparisonReport ab = compare(a, b);
    const ComparisonReport ba = compare(b, a);
    CHECK(ab.delta_over_104 == -ba.delta_over_104);
    CHECK(ab.delta_over_103 == -ba.delta_over_103);
    CHECK(ab.delta_under_097 == -ba.delta_under_097);
    CHECK(ab.delta_under_096 == -ba.delta_under_096);
    CHECK(ab.mean_norm_delta == doctest::Approx(-ba.mean_norm_delta).epsilon(1e-12));
    // Percent reductions are measured against the reference run, so only
    // their signs flip on swap.
    if (ab.pct_reduction_over_103 != 0.0) {
      CHECK(ab.pct_reduction_over_103 * ba.pct_reduction_over_103 <= 0.0);
    }
  }
  SUBCASE("shape mismatch throws") {
    EpisodeLog a = log_from_voltages(10, 3);
    EpisodeLog b = log_from_voltages(11, 3);
    CHECK_THROWS_AS(compare(a, b), ShapeMismatch);
  }
  SUBCASE("table formatting truncates to one decimal") {
    EpisodeLog reference = log_from_voltages(812, 1, 1.05);
    EpisodeLog candidate = log_from_voltages(812, 1, 1.05);
    for (std::size_t i = 532; i < 812; ++i) candidate.voltages[i] = 1.0;
    const ComparisonReport r = compare(candidate, reference);
    CHECK(r.reference.over_104 == 812);
    CHECK(r.candidate.over_104 == 532);
    const std::string table = format_comparison_table(r);
    CHECK(table.find("34.4") != std::string::npos);
  }
}
