#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pairsim/coincidence.hpp"
#include "pairsim/rates.hpp"
#include "pairsim/sim.hpp"
#include "pairsim/timetags.hpp"

using namespace pairsim;
using namespace pairsim::sim;

namespace {

SourceScenario ideal_scenario(double mu, double duration_s, std::uint64_t seed) {
  SourceScenario s;  // balanced interferometers, no imbalance
  s.mu_per_cycle = mu;
  s.duration_s = duration_s;
  s.seed = seed;
  return s;
}

DetectorModel clean_detector() {
  DetectorModel d;
  d.jitter_fwhm_ps = 0.0;
  return d;
}

}  // namespace

TEST_CASE("identical scenario and seed give byte-identical streams") {
  const SourceScenario s = default_scenario();
  DetectorModel d;
  const auto r1 = generate_stream(s, d, d);
  const auto r2 = generate_stream(s, d, d);
  CHECK(tags::stream_hash(r1.stream_a) == tags::stream_hash(r2.stream_a));
  CHECK(tags::stream_hash(r1.stream_b) == tags::stream_hash(r2.stream_b));
  REQUIRE(r1.stream_a.size() > 0);

  SourceScenario s2 = s;
  s2.seed += 1;
  const auto r3 = generate_stream(s2, d, d);
  CHECK(tags::stream_hash(r1.stream_a) != tags::stream_hash(r3.stream_a));
}

TEST_CASE("scenario validation rejects out-of-range parameters") {
  SourceScenario s = default_scenario();
  s.mu_per_cycle = 0.7;
  CHECK_THROWS_AS(s.validate(), ScenarioError);
  s = default_scenario();
  s.duration_s = 0.0;
  CHECK_THROWS_AS(s.validate(), ScenarioError);
}

TEST_CASE("truth bookkeeping is exact with a clean detector chain") {
  const SourceScenario s = ideal_scenario(5e-3, 2e-3, 7);
  const DetectorModel d = clean_detector();
  const auto r = generate_stream(s, d, d);
  CHECK(r.stream_a.size() == r.truth.detected_compat_a + r.truth.incompat_a);
  CHECK(r.stream_b.size() == r.truth.detected_compat_b + r.truth.incompat_b);
  CHECK(tags::is_sorted(r.stream_a));
  CHECK(tags::is_sorted(r.stream_b));
  std::uint64_t cell_total = 0;
  for (const auto& row : r.truth.cell_counts)
    for (auto c : row) cell_total += c;
  CHECK(cell_total == r.truth.detected_both);
  CHECK(r.truth.true_pair_times_ps.size() == r.truth.detected_both);
}

TEST_CASE("singles rates match the analytic model and scale linearly in mu") {
  const DetectorModel d = clean_detector();
  double rate_per_mu = 0.0;
  for (double mu : {2e-3, 4e-3, 8e-3}) {
    const SourceScenario s = ideal_scenario(mu, 4e-3, 11);
    const ExpectedRates er = expected_rates(s);
    const auto r = generate_stream(s, d, d);
    const double measured = r.stream_a.size() / s.duration_s;
    const double sigma = std::sqrt(static_cast<double>(r.stream_a.size())) /
                         s.duration_s;
    CHECK(std::abs(measured - er.singles_a_hz) <= 3.0 * sigma);
    // linearity: rate/mu constant across the scan
    const double per_mu = measured / mu;
    if (rate_per_mu > 0.0) {
      CHECK(per_mu == doctest::Approx(rate_per_mu)
                          .epsilon(3.0 * sigma / measured + 3e-2));
    }
    rate_per_mu = per_mu;
  }
}

TEST_CASE("empirical delta from a simulated stream recovers the configured value") {
  SourceScenario s = ideal_scenario(5e-3, 1e-2, 23);  // 4.09e7 cycles
  s.delta = 0.38;
  const DetectorModel d = clean_detector();
  const auto r = generate_stream(s, d, d);
  const ExpectedRates er = expected_rates(s);

  const double coincidences = static_cast<double>(r.truth.detected_both);
  const double c_hz = coincidences / s.duration_s;
  const double s_a_hz = r.stream_a.size() / s.duration_s;
  // effective one-arm efficiency from the truth record
  const double eta_eff_b =
      static_cast<double>(r.truth.detected_both) / r.truth.detected_compat_a;
  const double delta_emp = rates::delta_empirical(c_hz, eta_eff_b, s_a_hz);
  (void)er;
  // dominated by the Poisson error of the coincidence count
  const double sigma = delta_emp / std::sqrt(coincidences);
  CHECK(std::abs(delta_emp - s.delta) <= 3.0 * sigma);
}

TEST_CASE("mu recovered through the delta-corrected formula within 3 sigma") {
  // measured at the interference-free phase (theta = pi/2) where the joint
  // single-port capture factorizes and eq. (1) is exact
  SourceScenario s = ideal_scenario(5e-3, 1e-2, 31);
  s.delta = 0.38;
  s.alice_ifo.phase_rad = M_PI / 2.0;
  const DetectorModel d = clean_detector();
  const auto r = generate_stream(s, d, d);

  const double coincidences = static_cast<double>(r.truth.detected_both);
  rates::MeasuredRates m;
  m.singles_a_hz = r.stream_a.size() / s.duration_s;
  m.singles_b_hz = r.stream_b.size() / s.duration_s;
  m.coincidences_hz = coincidences / s.duration_s;
  m.repetition_rate_hz = s.repetition_rate_hz;
  const double mu_est = rates::mu_from_rates(m, s.delta);
  const double sigma = mu_est / std::sqrt(coincidences);
  CHECK(std::abs(mu_est - s.mu_per_cycle) <= 3.0 * sigma);
}

TEST_CASE("phase-minimum kills middle-middle coincidences for ideal optics") {
  SourceScenario s = ideal_scenario(2e-3, 2e-3, 5);
  s.delta = 1.0;  // no incompatible singles
  s.alice_ifo.phase_rad = M_PI;  // theta = pi
  const DetectorModel d = clean_detector();
  const auto r = generate_stream(s, d, d);
  REQUIRE(r.truth.detected_both > 50);
  const double mm = static_cast<double>(r.truth.cell_counts[1][1]);
  const double total = static_cast<double>(r.truth.detected_both);
  CHECK(mm / total < 5e-3);  // zero up to multi-pair statistics
}

TEST_CASE("middle-middle rate follows A + B cos(theta) over a 16-step sweep") {
  const DetectorModel d = clean_detector();
  coinc::FringeScan scan;
  std::vector<double> errors;
  for (int k = 0; k < 16; ++k) {
    const double theta = 2.0 * M_PI * k / 16.0;
    SourceScenario s = ideal_scenario(5e-3, 5e-2, 100 + k);
    s.alice_ifo.phase_rad = theta;
    const auto r = generate_stream(s, d, d);
    scan.control.push_back(theta);
    scan.rates_hz.push_back(r.truth.cell_counts[1][1] / s.duration_s);
    errors.push_back(std::sqrt(std::max<double>(r.truth.cell_counts[1][1], 1.0)) /
                     s.duration_s);
  }
  const coinc::FringeFit fit = coinc::fit_fringe(scan);
  CHECK(fit.frequency == doctest::Approx(1.0).epsilon(0.02));
  for (std::size_t k = 0; k < scan.control.size(); ++k)
    CHECK(std::abs(fit.residuals[k]) <= 3.0 * errors[k]);
}

TEST_CASE("interarrival gaps are geometric in cycles at low rate") {
  SourceScenario s = ideal_scenario(1e-3, 4e-3, 13);
  const DetectorModel d = clean_detector();
  const auto r = generate_stream(s, d, d);
  REQUIRE(r.stream_a.size() > 1000);
  // exponential at coarse scale: mean gap and survival at the mean agree
  std::vector<double> gaps;
  for (std::size_t i = 1; i < r.stream_a.size(); ++i)
    gaps.push_back(static_cast<double>(r.stream_a[i].time_ps) -
                   static_cast<double>(r.stream_a[i - 1].time_ps));
  double mean = 0.0;
  for (double g : gaps) mean += g;
  mean /= gaps.size();
  std::size_t beyond = 0;
  for (double g : gaps)
    if (g > mean) ++beyond;
  const double frac = static_cast<double>(beyond) / gaps.size();
  CHECK(std::abs(frac - std::exp(-1.0)) < 3.0 / std::sqrt(gaps.size()) + 5e-3);
}

TEST_CASE("jitter widens the folded peaks to the configured width") {
  SourceScenario s = ideal_scenario(5e-3, 1e-3, 17);
  DetectorModel d = clean_detector();
  d.jitter_fwhm_ps = 13.0;
  const auto r = generate_stream(s, d, d);
  // sample standard deviation around the early bin center (40 ps)
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& t : r.stream_a) {
    double folded = std::fmod(static_cast<double>(t.time_ps), kClockPeriodPs);
    if (folded > 20.0 && folded < 60.0) {
      sum += folded;
      sum2 += folded * folded;
      ++n;
    }
  }
  REQUIRE(n > 500);
  const double m = sum / n;
  const double sd = std::sqrt(sum2 / n - m * m);
  CHECK(m == doctest::Approx(40.0).epsilon(0.01));
  CHECK(sd == doctest::Approx(13.0 / 2.3548).epsilon(0.1));
}

TEST_CASE("hard dead time enforces a minimum gap") {
  SourceScenario s = ideal_scenario(0.05, 2e-4, 19);
  DetectorModel d = clean_detector();
  d.hard_dead_time_ps = 5000.0;
  const auto r = generate_stream(s, d, d);
  for (std::size_t i = 1; i < r.stream_a.size(); ++i)
    CHECK(r.stream_a[i].time_ps - r.stream_a[i - 1].time_ps >= 5000);
}

TEST_CASE("walk distortion shifts tags by d(t') of the preceding gap") {
  SourceScenario s = ideal_scenario(0.02, 5e-4, 29);
  DetectorModel clean = clean_detector();
  DetectorModel walked = clean_detector();
  walked.walk_curve = exponential_walk(30.0, 50e3);
  const auto rc = generate_stream(s, clean, clean);
  const auto rw = generate_stream(s, walked, walked);
  REQUIRE(rc.stream_a.size() == rw.stream_a.size());
  // same seeds, so tag-by-tag the difference is exactly the walk term
  std::size_t checked = 0;
  for (std::size_t i = 1; i < rc.stream_a.size(); ++i) {
    const double gap = static_cast<double>(rw.stream_a[i].time_ps) -
                       static_cast<double>(rw.stream_a[i - 1].time_ps);
    const double expected = 30.0 * std::exp(-(static_cast<double>(rw.stream_a[i].time_ps) -
                                              static_cast<double>(rw.stream_a[i - 1].time_ps)) /
                                            50e3);
    const double shift = static_cast<double>(rw.stream_a[i].time_ps) -
                         static_cast<double>(rc.stream_a[i].time_ps);
    (void)gap;
    // rounding to integer picoseconds
    if (std::abs(shift - expected) <= 1.0) ++checked;
  }
  CHECK(checked > rc.stream_a.size() * 9 / 10);
}

TEST_CASE("saturation thins the stream by the configured ratio") {
  SourceScenario s = ideal_scenario(5e-3, 2e-3, 37);
  DetectorModel sat = clean_detector();
  const ExpectedRates er = expected_rates(s);
  sat.saturation.rate_3db_hz = er.singles_a_hz;  // keep ratio 1/2
  const DetectorModel open = clean_detector();
  const auto r_open = generate_stream(s, open, open);
  const auto r_sat = generate_stream(s, sat, sat);
  const double ratio =
      static_cast<double>(r_sat.stream_a.size()) / r_open.stream_a.size();
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("stream file round trips are bit exact") {
  const SourceScenario s = ideal_scenario(2e-3, 1e-3, 41);
  const auto r = generate_stream(s, clean_detector(), clean_detector());
  const std::string bin_path = "roundtrip_test.ttg";
  const std::string csv_path = "roundtrip_test.csv";

  tags::save_stream(r.stream_a, bin_path);
  const tags::Stream rb = tags::load_stream(bin_path);
  CHECK(tags::stream_hash(rb) == tags::stream_hash(r.stream_a));

  tags::save_stream(r.stream_a, csv_path);
  const tags::Stream rc = tags::load_stream(csv_path);
  CHECK(tags::stream_hash(rc) == tags::stream_hash(r.stream_a));

  // empty stream round trip
  tags::save_stream({}, bin_path);
  CHECK(tags::load_stream(bin_path).empty());

  // corrupted magic
  {
    std::ofstream f(bin_path, std::ios::binary);
    f << "NOTMAGIC" << std::string(8, '\0');
  }
  CHECK_THROWS_AS(tags::load_stream(bin_path), tags::FormatError);
  std::filesystem::remove(bin_path);
  std::filesystem::remove(csv_path);
}

TEST_CASE("large stream hash round trip") {
  // 1e6 records through the binary format, hash-identical
  tags::Stream s;
  s.reserve(1000000);
  std::uint64_t t = 0;
  for (int i = 0; i < 1000000; ++i) {
    t += 1 + (i % 7) * 100;
    s.push_back({static_cast<std::uint8_t>(i % 2), t});
  }
  const std::string path = "big_roundtrip.ttg";
  tags::save_stream(s, path);
  CHECK(tags::stream_hash(tags::load_stream(path)) == tags::stream_hash(s));
  std::filesystem::remove(path);
}
