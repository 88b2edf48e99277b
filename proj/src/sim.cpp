#include "pairsim/sim.hpp"

#include <algorithm>
#include <cmath>

#include "pairsim/rng.hpp"

namespace pairsim::sim {

namespace {

constexpr int kE = 0, kM = 1, kL = 2;
constexpr double kBinCenterPs[3] = {kEarlyBinPs, kMiddleBinPs, kLateBinPs};

struct ArmAmplitudes {
  double p_short = 0.0;  // |r t alpha|^2 into the monitored port
  double p_long = 0.0;   // |r t beta|^2
};

ArmAmplitudes arm_amplitudes(const rates::InterferometerSpec& ifo) {
  const double t2 = ifo.transmittance_t * ifo.transmittance_t;
  const double r2 = 1.0 - t2;
  return {r2 * t2 * ifo.path_eff_alpha, r2 * t2 * ifo.path_eff_beta};
}

}  // namespace

void SourceScenario::validate() const {
  if (mu_per_cycle < 0.0 || mu_per_cycle > 0.5)
    throw ScenarioError("mu per cycle outside [0, 0.5]");
  if (duration_s <= 0.0) throw ScenarioError("duration must be positive");
  if (delta <= 0.0 || delta > 1.0) throw ScenarioError("delta outside (0, 1]");
  if (eta_a < 0.0 || eta_a > 1.0 || eta_b < 0.0 || eta_b > 1.0)
    throw ScenarioError("efficiency outside [0, 1]");
  if (phase_visibility_v < 0.0 || phase_visibility_v > 1.0)
    throw ScenarioError("phase visibility outside [0, 1]");
}

SourceScenario default_scenario() {
  SourceScenario s;
  s.source_ifo.path_eff_alpha = 1.0;
  s.source_ifo.path_eff_beta = 1.0 / 1.13;
  s.alice_ifo.path_eff_alpha = 1.0;
  s.alice_ifo.path_eff_beta = 1.0 / 1.24;
  s.bob_ifo.path_eff_alpha = 1.0;
  s.bob_ifo.path_eff_beta = 1.0 / 1.15;
  return s;
}

RoutingModel routing_model(const SourceScenario& s) {
  const ArmAmplitudes a = arm_amplitudes(s.alice_ifo);
  const ArmAmplitudes b = arm_amplitudes(s.bob_ifo);

  // Pair emission weights of the early/late source bins. The interferometer
  // imbalance acts on the pump pulses and pair generation goes as pump
  // power squared, so mu_E/mu_L is the squared intensity ratio.
  const double x = rates::source_port_mu_ratio(1, s.source_ifo);
  const double se2 = x / (1.0 + x);
  const double sl2 = 1.0 / (1.0 + x);

  RoutingModel m;
  m.theta = s.alice_ifo.phase_rad + s.bob_ifo.phase_rad - s.source_ifo.phase_rad;
  m.p_bin_a = {se2 * a.p_short, se2 * a.p_long + sl2 * a.p_short, sl2 * a.p_long};
  m.p_bin_b = {se2 * b.p_short, se2 * b.p_long + sl2 * b.p_short, sl2 * b.p_long};
  m.cap_a = m.p_bin_a[0] + m.p_bin_a[1] + m.p_bin_a[2];
  m.cap_b = m.p_bin_b[0] + m.p_bin_b[1] + m.p_bin_b[2];

  m.joint[kE][kE] = se2 * a.p_short * b.p_short;
  m.joint[kE][kM] = se2 * a.p_short * b.p_long;
  m.joint[kM][kE] = se2 * a.p_long * b.p_short;
  m.joint[kM][kL] = sl2 * a.p_short * b.p_long;
  m.joint[kL][kM] = sl2 * a.p_long * b.p_short;
  m.joint[kL][kL] = sl2 * a.p_long * b.p_long;
  const double early_branch = se2 * a.p_long * b.p_long;
  const double late_branch = sl2 * a.p_short * b.p_short;
  const double cross = 2.0 * s.phase_visibility_v *
                       std::sqrt(early_branch * late_branch) * std::cos(m.theta);
  m.joint[kM][kM] = early_branch + late_branch + cross;
  m.joint[kE][kL] = 0.0;
  m.joint[kL][kE] = 0.0;
  m.fringe_v0 = 2.0 * std::sqrt(early_branch * late_branch) /
                (early_branch + late_branch);
  return m;
}

ExpectedRates expected_rates(const SourceScenario& s) {
  const RoutingModel m = routing_model(s);
  ExpectedRates r;
  // The scenario mu is the operational mean pair number of eq. (1): the
  // spectrally overlapping pair flux is mu * delta per cycle, and each arm
  // carries 1/delta more singles than the overlap supplies.
  const double pair_rate = s.repetition_rate_hz * s.mu_per_cycle * s.delta;
  double joint_sum = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) joint_sum += m.joint[i][j];
  const double compat_a = pair_rate * m.cap_a * s.eta_a;
  const double compat_b = pair_rate * m.cap_b * s.eta_b;
  r.singles_a_hz = compat_a / s.delta;
  r.singles_b_hz = compat_b / s.delta;
  r.true_coincidences_hz = pair_rate * joint_sum * s.eta_a * s.eta_b;
  r.eta_eff_a = r.true_coincidences_hz / compat_b;
  r.eta_eff_b = r.true_coincidences_hz / compat_a;
  return r;
}

namespace {

struct RawEvent {
  double time_ps;
};

// Geometric skip over inactive cycles, truncated-Poisson(>=1) count inside
// an active cycle.
template <typename Body>
void for_each_active_cycle(std::uint64_t cycles, double mean_per_cycle, Rng& rng,
                           Body&& body) {
  if (mean_per_cycle <= 0.0) return;
  const double p_active = -std::expm1(-mean_per_cycle);
  std::uint64_t cycle = rng.geometric_gap(p_active);
  while (cycle < cycles) {
    // truncated Poisson: invert the conditional CDF
    double u = rng.uniform() * p_active;
    double pk = std::exp(-mean_per_cycle);
    double cdf = 0.0;
    int k = 0;
    while (k < 100) {
      ++k;
      pk *= mean_per_cycle / k;
      cdf += pk;
      if (u < cdf) break;
    }
    body(cycle, k);
    cycle += 1 + rng.geometric_gap(p_active);
  }
}

// Detector chain: jitter, saturation thinning, hard dead time, then walk
// distortion measured on the surviving stream.
tags::Stream detector_chain(std::vector<double>& times, const DetectorModel& det,
                            double expected_rate_hz, double duration_ps,
                            std::uint8_t channel, Rng& rng) {
  std::sort(times.begin(), times.end());
  const double sigma = det.jitter_fwhm_ps / 2.354820045030949;

  std::vector<double> jittered;
  jittered.reserve(times.size());
  // rate-dependent efficiency relative to nominal; the nominal efficiency
  // itself lives in the scenario eta
  const double keep = 1.0 / (1.0 + expected_rate_hz / det.saturation.rate_3db_hz);
  for (double t : times) {
    if (keep < 1.0 && !rng.bernoulli(keep)) continue;
    jittered.push_back(sigma > 0.0 ? t + rng.normal(0.0, sigma) : t);
  }
  std::sort(jittered.begin(), jittered.end());

  std::vector<double> kept;
  kept.reserve(jittered.size());
  double last = -1e18;
  for (double t : jittered) {
    if (det.hard_dead_time_ps > 0.0 && t - last < det.hard_dead_time_ps) continue;
    kept.push_back(t);
    last = t;
  }

  tags::Stream out;
  out.reserve(kept.size());
  double prev_out = 0.0;
  bool first = true;
  for (double t : kept) {
    double distorted = t;
    if (det.walk_curve && !first) {
      const double gap = t - prev_out;
      if (gap > 0.0) distorted = t + det.walk_curve(gap);
    }
    prev_out = distorted;
    first = false;
    if (distorted < 0.0 || distorted >= duration_ps) continue;
    out.push_back({channel, static_cast<std::uint64_t>(std::llround(distorted))});
  }
  std::sort(out.begin(), out.end(), [](const tags::TimeTag& a, const tags::TimeTag& b) {
    return a.time_ps < b.time_ps;
  });
  return out;
}

}  // namespace

SimulationResult generate_stream(const SourceScenario& scenario,
                                 const DetectorModel& det_a,
                                 const DetectorModel& det_b) {
  scenario.validate();
  const RoutingModel m = routing_model(scenario);
  const double period_ps = 1e12 / scenario.repetition_rate_hz;
  const std::uint64_t cycles = static_cast<std::uint64_t>(
      scenario.duration_s * scenario.repetition_rate_hz);
  const double duration_ps = cycles * period_ps;

  SimulationResult res;
  res.truth.cycles = cycles;

  // flatten the routing table into a sampling list: 9 joint cells, then
  // A-only, B-only and both-lost outcomes
  struct Outcome {
    int bin_a;  // -1 = lost
    int bin_b;
    double p;
  };
  std::vector<Outcome> outcomes;
  double joint_sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      outcomes.push_back({i, j, m.joint[i][j]});
      joint_sum += m.joint[i][j];
    }
  }
  for (int i = 0; i < 3; ++i) {
    double row = m.p_bin_a[i];
    for (int j = 0; j < 3; ++j) row -= m.joint[i][j];
    if (row < -1e-12) throw ScenarioError("negative routing probability");
    outcomes.push_back({i, -1, std::max(0.0, row)});
  }
  for (int j = 0; j < 3; ++j) {
    double col = m.p_bin_b[j];
    for (int i = 0; i < 3; ++i) col -= m.joint[i][j];
    if (col < -1e-12) throw ScenarioError("negative routing probability");
    outcomes.push_back({-1, j, std::max(0.0, col)});
  }
  // remaining probability: both photons leave through unmonitored ports

  Rng pair_rng(scenario.seed, "pairs");
  Rng inc_a_rng(scenario.seed, "incompatible-a");
  Rng inc_b_rng(scenario.seed, "incompatible-b");
  Rng det_a_rng(scenario.seed, "detector-a");
  Rng det_b_rng(scenario.seed, "detector-b");

  std::vector<double> events_a, events_b;
  const double overlap_mu = scenario.mu_per_cycle * scenario.delta;
  const double exp_per_cycle_a = scenario.mu_per_cycle * m.cap_a * scenario.eta_a;
  const double exp_per_cycle_b = scenario.mu_per_cycle * m.cap_b * scenario.eta_b;
  events_a.reserve(static_cast<std::size_t>(cycles * exp_per_cycle_a * 1.05) + 64);
  events_b.reserve(static_cast<std::size_t>(cycles * exp_per_cycle_b * 1.05) + 64);

  auto emit = [&](std::vector<double>& arm, std::uint64_t cycle, int bin) {
    arm.push_back(cycle * period_ps + kBinCenterPs[bin]);
  };

  // entangled pairs (compatible spectral modes)
  for_each_active_cycle(
      cycles, overlap_mu, pair_rng, [&](std::uint64_t cycle, int k) {
        if (k > 1) ++res.truth.multi_pair_cycles;
        for (int p = 0; p < k; ++p) {
          ++res.truth.emitted_pairs;
          double u = pair_rng.uniform();
          int bin_a = -1, bin_b = -1;
          for (const auto& o : outcomes) {
            if (u < o.p) {
              bin_a = o.bin_a;
              bin_b = o.bin_b;
              break;
            }
            u -= o.p;
          }
          const bool det_ok_a = bin_a >= 0 && pair_rng.bernoulli(scenario.eta_a);
          const bool det_ok_b = bin_b >= 0 && pair_rng.bernoulli(scenario.eta_b);
          if (det_ok_a) {
            ++res.truth.detected_compat_a;
            emit(events_a, cycle, bin_a);
          }
          if (det_ok_b) {
            ++res.truth.detected_compat_b;
            emit(events_b, cycle, bin_b);
          }
          if (det_ok_a && det_ok_b) {
            ++res.truth.detected_both;
            ++res.truth.cell_counts[bin_a][bin_b];
            res.truth.true_pair_times_ps.emplace_back(
                static_cast<std::uint64_t>(
                    std::llround(cycle * period_ps + kBinCenterPs[bin_a])),
                static_cast<std::uint64_t>(
                    std::llround(cycle * period_ps + kBinCenterPs[bin_b])));
          }
        }
      });

  // incompatible-mode singles: independent Poisson load on each arm with the
  // three-peak bin profile, already expressed post-efficiency
  const double inc_mean_a = exp_per_cycle_a * (1.0 - scenario.delta);
  const double inc_mean_b = exp_per_cycle_b * (1.0 - scenario.delta);
  auto add_incompatibles = [&](std::vector<double>& arm, double mean, Rng& rng,
                               const std::array<double, 3>& p_bin, double cap,
                               std::uint64_t& counter) {
    for_each_active_cycle(cycles, mean, rng, [&](std::uint64_t cycle, int k) {
      for (int e = 0; e < k; ++e) {
        double u = rng.uniform() * cap;
        int bin = kL;
        if (u < p_bin[kE])
          bin = kE;
        else if (u < p_bin[kE] + p_bin[kM])
          bin = kM;
        emit(arm, cycle, bin);
        ++counter;
      }
    });
  };
  add_incompatibles(events_a, inc_mean_a, inc_a_rng, m.p_bin_a, m.cap_a,
                    res.truth.incompat_a);
  add_incompatibles(events_b, inc_mean_b, inc_b_rng, m.p_bin_b, m.cap_b,
                    res.truth.incompat_b);

  const ExpectedRates er = expected_rates(scenario);
  res.stream_a = detector_chain(events_a, det_a, er.singles_a_hz, duration_ps, 0,
                                det_a_rng);
  res.stream_b = detector_chain(events_b, det_b, er.singles_b_hz, duration_ps, 1,
                                det_b_rng);
  return res;
}

}  // namespace pairsim::sim
