#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>

#include "pairsim/constants.hpp"
#include "pairsim/rates.hpp"
#include "pairsim/timetags.hpp"

namespace pairsim::sim {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One detector: timing jitter, ground-truth time-walk distortion, count-rate
// saturation and a hard dead time.
struct DetectorModel {
  double jitter_fwhm_ps = 13.0;
  // d(t') added to each tag based on the inter-arrival time that precedes
  // it; zero when absent
  std::function<double(double)> walk_curve;
  rates::SaturationSpec saturation{1.0, 1e18};  // wide open by default
  double hard_dead_time_ps = 0.0;
};

inline std::function<double(double)> exponential_walk(double amplitude_ps,
                                                      double tau_ps) {
  return [amplitude_ps, tau_ps](double t_prime_ps) {
    return amplitude_ps * std::exp(-t_prime_ps / tau_ps);
  };
}

struct SourceScenario {
  double repetition_rate_hz = kRepetitionRateHz;
  double mu_per_cycle = 1e-3;  // mu = mu_E + mu_L
  double delta = 0.38;         // sets the incompatible-mode singles load
  double eta_a = 0.2;
  double eta_b = 0.2;
  rates::InterferometerSpec source_ifo;
  rates::InterferometerSpec alice_ifo;
  rates::InterferometerSpec bob_ifo;
  double phase_visibility_v = 1.0;
  double duration_s = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
};

// Defaults matching the measured interferometer imbalances: early/late
// intensity ratios 1.13 (source), 1.24 (Alice), 1.15 (Bob).
SourceScenario default_scenario();

// Routing probabilities derived from the interferometer amplitudes:
// per-photon capture into the three bins of the monitored port, and the
// joint 3x3 cell table including the phase-dependent middle-middle term.
struct RoutingModel {
  std::array<double, 3> p_bin_a{};  // E, M, L marginals (pre-efficiency)
  std::array<double, 3> p_bin_b{};
  double cap_a = 0.0;  // sum of p_bin_a
  double cap_b = 0.0;
  // joint routing table at phase theta; cells [binA][binB]
  std::array<std::array<double, 3>, 3> joint{};
  double theta = 0.0;
  double fringe_v0 = 0.0;  // interferometer-limited middle-middle visibility
};

RoutingModel routing_model(const SourceScenario& s);

struct ExpectedRates {
  double singles_a_hz = 0.0;  // compatible + incompatible, post-efficiency
  double singles_b_hz = 0.0;
  double true_coincidences_hz = 0.0;
  double eta_eff_a = 0.0;  // P(A detected | B detected), pair-wise
  double eta_eff_b = 0.0;
};

ExpectedRates expected_rates(const SourceScenario& s);

struct GroundTruth {
  std::uint64_t cycles = 0;
  std::uint64_t emitted_pairs = 0;
  std::uint64_t multi_pair_cycles = 0;
  std::uint64_t detected_compat_a = 0;
  std::uint64_t detected_compat_b = 0;
  std::uint64_t detected_both = 0;
  std::uint64_t incompat_a = 0;
  std::uint64_t incompat_b = 0;
  // detected-pair bin assignments (early/middle/late on each side)
  std::array<std::array<std::uint64_t, 3>, 3> cell_counts{};
  // nominal emission times of both members of every detected pair
  std::vector<std::pair<std::uint64_t, std::uint64_t>> true_pair_times_ps;
};

struct SimulationResult {
  tags::Stream stream_a;  // channel 0
  tags::Stream stream_b;  // channel 1
  GroundTruth truth;
};

// Seeded synthetic time-tag generation for the two stations. Single pass,
// single thread per call; identical scenario and seed give byte-identical
// streams.
SimulationResult generate_stream(const SourceScenario& scenario,
                                 const DetectorModel& det_a,
                                 const DetectorModel& det_b);

}  // namespace pairsim::sim
