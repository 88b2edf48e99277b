#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pairsim/constants.hpp"
#include "pairsim/timetags.hpp"

namespace pairsim::coinc {

struct CoincError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Bin { Early = 0, Middle = 1, Late = 2, Guard = 3, Outside = 4 };

struct BinConfig {
  double period_ps = kClockPeriodPs;
  // three [start, end) windows tiling the period; guards subtract from them
  std::array<std::array<double, 2>, 3> windows{{{0.0, kGuardCenter1Ps},
                                                {kGuardCenter1Ps, kGuardCenter2Ps},
                                                {kGuardCenter2Ps, kClockPeriodPs}}};
  std::array<double, 2> guard_centers{kGuardCenter1Ps, kGuardCenter2Ps};
  double guard_width_ps = kDefaultGuardWidthPs;
};

Bin classify_bin(double time_ps, const BinConfig& config);

struct CoincidenceRecord {
  Bin a_bin;
  Bin b_bin;
  std::uint64_t cycle_index;
  std::uint64_t a_time_ps;
  std::uint64_t b_time_ps;
};

struct CoincidenceResult {
  std::vector<CoincidenceRecord> records;
  // bin-pair counts, [a][b] over early/middle/late; guard-classified tags
  // are excluded before pairing
  std::array<std::array<std::uint64_t, 3>, 3> cells{};
  std::uint64_t guard_excluded_a = 0;
  std::uint64_t guard_excluded_b = 0;
  std::uint64_t outside_a = 0;
  std::uint64_t outside_b = 0;
  std::uint64_t unpaired_a = 0;
  std::uint64_t unpaired_b = 0;
  std::uint64_t total_a = 0;
  std::uint64_t total_b = 0;

  std::uint64_t total_coincidences() const {
    std::uint64_t n = 0;
    for (const auto& row : cells)
      for (auto c : row) n += c;
    return n;
  }
};

// Greedy mutual-nearest pairing within the window over two sorted streams.
CoincidenceResult find_coincidences(const tags::Stream& a, const tags::Stream& b,
                                    double window_ps = 100.0,
                                    const BinConfig& config = BinConfig{});

struct Visibility {
  double percent = 0.0;
  double error_percent = 0.0;  // propagated Poisson error
};

Visibility visibility(double counts_max, double counts_min, double duration_max_s,
                      double duration_min_s);

struct FringeScan {
  std::vector<double> control;  // interferometer electrical power, a.u.
  std::vector<double> rates_hz;
};

struct FringeFit {
  double offset = 0.0;     // A
  double amplitude = 0.0;  // B
  double frequency = 0.0;  // a, phase = a * control + b
  double phase = 0.0;      // b
  double r_squared = 0.0;
  bool degenerate = false;
  std::vector<double> residuals;
};

// Least-squares fit of A + B cos(a P + b): linear in (A, B cos b, B sin b)
// at fixed frequency, scanned and refined over the frequency.
FringeFit fit_fringe(const FringeScan& scan);

struct PhaseLockResult {
  double control = 0.0;
  double rate_hz = 0.0;
  std::vector<std::pair<double, double>> trace;  // (control, rate) per query
  int iterations = 0;
  bool converged = false;
};

enum class LockTarget { Min, Max };

// Hill climbing with step shrink on reversal against a counts oracle
// control -> (counts, duration_s).
PhaseLockResult phase_lock(
    const std::function<std::pair<double, double>(double)>& rate_oracle,
    LockTarget target, double initial_control, double step,
    int max_iters = 200, double tolerance = 1e-4);

}  // namespace pairsim::coinc
