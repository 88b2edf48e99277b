#include <doctest.h>

#include <cmath>

#include "pairsim/coincidence.hpp"
#include "pairsim/rng.hpp"
#include "pairsim/sim.hpp"

using namespace pairsim;
using namespace pairsim::coinc;

TEST_CASE("bin classification: centers, guards and precedence") {
  const BinConfig cfg;
  CHECK(classify_bin(40.0, cfg) == Bin::Early);
  CHECK(classify_bin(120.0, cfg) == Bin::Middle);
  CHECK(classify_bin(200.0, cfg) == Bin::Late);
  CHECK(classify_bin(80.0, cfg) == Bin::Guard);
  CHECK(classify_bin(160.0, cfg) == Bin::Guard);
  CHECK(classify_bin(84.9, cfg) == Bin::Guard);
  CHECK(classify_bin(85.1, cfg) == Bin::Middle);
  // folding across many periods
  CHECK(classify_bin(40.0 + 1000 * kClockPeriodPs, cfg) == Bin::Early);
  CHECK(classify_bin(80.0 + 999 * kClockPeriodPs, cfg) == Bin::Guard);
}

TEST_CASE("identical streams pair one to one at a 1 ps window") {
  tags::Stream a;
  for (int i = 0; i < 1000; ++i)
    a.push_back({0, static_cast<std::uint64_t>(40 + i * 2000)});
  const CoincidenceResult r = find_coincidences(a, a, 1.0);
  std::uint64_t paired = r.total_coincidences();
  // only tags in guard-free bins participate
  CHECK(paired + r.guard_excluded_a == 1000);
  CHECK(r.unpaired_a == 0);
}

TEST_CASE("disjoint time ranges give zero coincidences") {
  tags::Stream a, b;
  for (int i = 0; i < 100; ++i) {
    a.push_back({0, static_cast<std::uint64_t>(40 + i * 3000)});
    b.push_back({1, static_cast<std::uint64_t>(10'000'000 + 40 + i * 3000)});
  }
  const CoincidenceResult r = find_coincidences(a, b, 100.0);
  CHECK(r.total_coincidences() == 0);
  CHECK(r.unpaired_a == r.total_a - r.guard_excluded_a);
}

TEST_CASE("tag conservation across cells, guards and unpaired") {
  sim::SourceScenario s = sim::default_scenario();
  s.mu_per_cycle = 5e-3;
  s.duration_s = 2e-3;
  s.seed = 77;
  sim::DetectorModel d;
  const auto sim_res = sim::generate_stream(s, d, d);
  const CoincidenceResult r =
      find_coincidences(sim_res.stream_a, sim_res.stream_b, 100.0);
  const std::uint64_t paired = r.total_coincidences();
  CHECK(paired + r.guard_excluded_a + r.outside_a + r.unpaired_a == r.total_a);
  CHECK(paired + r.guard_excluded_b + r.outside_b + r.unpaired_b == r.total_b);
}

TEST_CASE("swapping the streams transposes the cell matrix") {
  sim::SourceScenario s = sim::default_scenario();
  s.mu_per_cycle = 4e-3;
  s.duration_s = 2e-3;
  s.seed = 99;
  sim::DetectorModel d;
  const auto sim_res = sim::generate_stream(s, d, d);
  const CoincidenceResult ab =
      find_coincidences(sim_res.stream_a, sim_res.stream_b, 100.0);
  const CoincidenceResult ba =
      find_coincidences(sim_res.stream_b, sim_res.stream_a, 100.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(ab.cells[i][j] == ba.cells[j][i]);
}

TEST_CASE("recall of true pairs is at least 99.9% at the default window") {
  sim::SourceScenario s;  // ideal interferometers
  s.mu_per_cycle = 5e-3;
  s.eta_a = 0.5;
  s.eta_b = 0.5;
  s.duration_s = 0.05;
  s.seed = 1234;
  sim::DetectorModel d;
  d.jitter_fwhm_ps = 13.0;  // within the <= 15 ps regime
  const auto sim_res = sim::generate_stream(s, d, d);
  // guard regions off for the recall accounting
  BinConfig cfg;
  cfg.guard_width_ps = 0.0;
  const CoincidenceResult r =
      find_coincidences(sim_res.stream_a, sim_res.stream_b, 100.0, cfg);
  REQUIRE(sim_res.truth.detected_both > 3000);
  CHECK(static_cast<double>(r.total_coincidences()) >=
        0.999 * static_cast<double>(sim_res.truth.detected_both));
}

TEST_CASE("exact truth equality with a clean chain and guards off") {
  sim::SourceScenario s;
  s.mu_per_cycle = 2e-3;
  s.delta = 1.0;  // no incompatible singles: every tag belongs to a pair
  s.duration_s = 2e-3;
  s.seed = 4321;
  sim::DetectorModel d;
  d.jitter_fwhm_ps = 0.0;
  const auto sim_res = sim::generate_stream(s, d, d);
  BinConfig cfg;
  cfg.guard_width_ps = 0.0;
  const CoincidenceResult r =
      find_coincidences(sim_res.stream_a, sim_res.stream_b, 100.0, cfg);
  // multi-pair cycles can land two tags in one bin slot; require agreement
  // up to those collisions
  const std::uint64_t truth = sim_res.truth.detected_both;
  const std::uint64_t found = r.total_coincidences();
  CHECK(found >= truth - 2 * sim_res.truth.multi_pair_cycles);
  CHECK(found <= truth + 2 * sim_res.truth.multi_pair_cycles);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const auto t = sim_res.truth.cell_counts[i][j];
      const auto c = r.cells[i][j];
      CHECK(std::llabs(static_cast<long long>(t) - static_cast<long long>(c)) <=
            2 * static_cast<long long>(sim_res.truth.multi_pair_cycles));
    }
}

TEST_CASE("widening the guard never increases any cell count") {
  sim::SourceScenario s = sim::default_scenario();
  s.mu_per_cycle = 5e-3;
  s.duration_s = 2e-3;
  s.seed = 55;
  sim::DetectorModel d;
  const auto sim_res = sim::generate_stream(s, d, d);
  std::array<std::array<std::uint64_t, 3>, 3> prev{};
  bool first = true;
  for (double guard : {0.0, 5.0, 10.0, 20.0, 40.0}) {
    BinConfig cfg;
    cfg.guard_width_ps = guard;
    const CoincidenceResult r =
        find_coincidences(sim_res.stream_a, sim_res.stream_b, 100.0, cfg);
    if (!first)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(r.cells[i][j] <= prev[i][j]);
    prev = r.cells;
    first = false;
  }
}

TEST_CASE("visibility values and undefined case") {
  CHECK(visibility(100.0, 0.0, 1.0, 1.0).percent == doctest::Approx(100.0));
  CHECK(visibility(50.0, 50.0, 1.0, 1.0).percent == doctest::Approx(0.0));
  CHECK(visibility(300.0, 100.0, 2.0, 2.0).percent == doctest::Approx(50.0));
  CHECK_THROWS_AS(visibility(0.0, 0.0, 1.0, 1.0), CoincError);
  CHECK_THROWS_AS(visibility(1.0, 1.0, 0.0, 1.0), CoincError);
  // Poisson error: scales like 1/sqrt(N) of the smaller count
  const Visibility v = visibility(10000.0, 100.0, 1.0, 1.0);
  CHECK(v.error_percent > 0.0);
  CHECK(v.error_percent < 1.0);
}

TEST_CASE("fringe fit recovers a pure cosine exactly") {
  FringeScan scan;
  const double A = 120.0, B = 80.0, freq = 0.8, phase = 0.6;
  for (int k = 0; k < 32; ++k) {
    const double p = k * 0.35;
    scan.control.push_back(p);
    scan.rates_hz.push_back(A + B * std::cos(freq * p + phase));
  }
  const FringeFit fit = fit_fringe(scan);
  CHECK(fit.offset == doctest::Approx(A).epsilon(1e-6));
  CHECK(fit.amplitude == doctest::Approx(B).epsilon(1e-6));
  CHECK(fit.frequency == doctest::Approx(freq).epsilon(1e-6));
  CHECK(std::abs(fit.amplitude) <= std::abs(fit.offset));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(fit.degenerate);
}

TEST_CASE("fringe fit on noisy data recovers parameters within 3 sigma") {
  // Monte Carlo over independent noise realizations
  Rng rng(31337, "fringe-noise");
  const double A = 1000.0, B = 600.0, freq = 1.3, phase = -0.4;
  int ok_amp = 0, ok_off = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    FringeScan scan;
    for (int k = 0; k < 24; ++k) {
      const double p = k * 0.25;
      const double mean = A + B * std::cos(freq * p + phase);
      scan.control.push_back(p);
      scan.rates_hz.push_back(mean + rng.normal(0.0, std::sqrt(mean)));
    }
    const FringeFit fit = fit_fringe(scan);
    // sigma of the mean-level estimate ~ sqrt(A/n)
    const double sig = std::sqrt(A / 24.0) * 3.0;
    if (std::abs(fit.offset - A) < 3.0 * sig) ++ok_off;
    if (std::abs(fit.amplitude - B) < 3.0 * sig) ++ok_amp;
  }
  CHECK(ok_off >= trials - 2);
  CHECK(ok_amp >= trials - 2);
}

TEST_CASE("degenerate constant scan reports zero amplitude with the flag") {
  FringeScan scan;
  for (int k = 0; k < 12; ++k) {
    scan.control.push_back(k * 1.0);
    scan.rates_hz.push_back(42.0);
  }
  const FringeFit fit = fit_fringe(scan);
  CHECK(fit.degenerate);
  CHECK(fit.amplitude == 0.0);
  CHECK(fit.offset == doctest::Approx(42.0));
  CHECK_THROWS_AS(fit_fringe(FringeScan{{1, 2, 3}, {1, 2, 3}}), CoincError);
}

TEST_CASE("phase lock converges on a noiseless cosine") {
  auto oracle = [](double control) {
    return std::make_pair(1e6 * (1.0 + std::cos(control)), 1.0);
  };
  const PhaseLockResult r =
      phase_lock(oracle, LockTarget::Max, 2.0, 0.5, 400, 1e-5);
  CHECK(r.converged);
  CHECK(std::abs(std::cos(r.control) - 1.0) < 1e-4);
  CHECK_FALSE(r.trace.empty());

  const PhaseLockResult rmin =
      phase_lock(oracle, LockTarget::Min, 2.0, 0.5, 400, 1e-5);
  CHECK(std::abs(std::cos(rmin.control) + 1.0) < 1e-4);
}

TEST_CASE("phase lock starting at the extremum converges immediately") {
  auto oracle = [](double control) {
    return std::make_pair(1e6 * (1.0 + std::cos(control)), 1.0);
  };
  const PhaseLockResult r =
      phase_lock(oracle, LockTarget::Max, 0.0, 0.25, 400, 1e-4);
  CHECK(r.converged);
  CHECK(std::abs(std::cos(r.control) - 1.0) < 1e-4);
}

TEST_CASE("phase lock against a Poisson-noisy oracle lands within 2% of the peak") {
  Rng rng(271828, "phase-lock-noise");
  const double peak = 1e4;
  auto oracle = [&](double control) {
    const double mean = 0.5 * peak * (1.0 + std::cos(control));
    // Poisson sampling by normal approximation at these counts
    const double counts = std::max(0.0, mean + rng.normal(0.0, std::sqrt(mean)));
    return std::make_pair(counts, 1.0);
  };
  const PhaseLockResult r =
      phase_lock(oracle, LockTarget::Max, 1.2, 0.4, 200, 1e-3);
  // query the true rate at the locked control
  const double locked_true = 0.5 * peak * (1.0 + std::cos(r.control));
  CHECK(locked_true >= 0.98 * peak);
}

TEST_CASE("phase lock rejects non-positive steps and propagates oracle failures") {
  auto oracle = [](double) -> std::pair<double, double> {
    throw std::runtime_error("hardware went away");
  };
  CHECK_THROWS_AS(phase_lock(oracle, LockTarget::Max, 0.0, 0.0), CoincError);
  CHECK_THROWS_WITH(phase_lock(oracle, LockTarget::Max, 0.0, 0.1),
                    "hardware went away");
}
