#include "pairsim/coincidence.hpp"

#include <algorithm>
#include <cmath>

namespace pairsim::coinc {

Bin classify_bin(double time_ps, const BinConfig& config) {
  double folded = std::fmod(time_ps, config.period_ps);
  if (folded < 0.0) folded += config.period_ps;
  for (double g : config.guard_centers) {
    if (std::abs(folded - g) <= 0.5 * config.guard_width_ps) return Bin::Guard;
  }
  for (int w = 0; w < 3; ++w) {
    if (folded >= config.windows[w][0] && folded < config.windows[w][1])
      return static_cast<Bin>(w);
  }
  return Bin::Outside;
}

namespace {

struct Classified {
  std::uint64_t time_ps;
  Bin bin;
};

std::vector<Classified> classify_stream(const tags::Stream& s,
                                        const BinConfig& config,
                                        std::uint64_t& guards,
                                        std::uint64_t& outside) {
  std::vector<Classified> out;
  out.reserve(s.size());
  for (const auto& t : s) {
    const Bin b = classify_bin(static_cast<double>(t.time_ps), config);
    if (b == Bin::Guard) {
      ++guards;
    } else if (b == Bin::Outside) {
      ++outside;
    } else {
      out.push_back({t.time_ps, b});
    }
  }
  return out;
}

}  // namespace

CoincidenceResult find_coincidences(const tags::Stream& a, const tags::Stream& b,
                                    double window_ps, const BinConfig& config) {
  if (!tags::is_sorted(a) || !tags::is_sorted(b))
    throw CoincError("streams must be sorted");

  CoincidenceResult res;
  res.total_a = a.size();
  res.total_b = b.size();
  const auto ca = classify_stream(a, config, res.guard_excluded_a, res.outside_a);
  const auto cb = classify_stream(b, config, res.guard_excluded_b, res.outside_b);

  // two-pointer sweep pairing mutual nearest neighbours within the window;
  // each tag is used at most once
  std::size_t i = 0, j = 0;
  std::uint64_t paired = 0;
  while (i < ca.size() && j < cb.size()) {
    const double ta = static_cast<double>(ca[i].time_ps);
    const double tb = static_cast<double>(cb[j].time_ps);
    const double d = ta - tb;
    if (d > window_ps) {
      ++j;
      continue;
    }
    if (d < -window_ps) {
      ++i;
      continue;
    }
    // candidates are within the window; check whether the next tag on
    // either side is a closer partner
    const double gap = std::abs(d);
    const bool next_b_closer =
        (j + 1 < cb.size()) &&
        std::abs(ta - static_cast<double>(cb[j + 1].time_ps)) < gap;
    const bool next_a_closer =
        (i + 1 < ca.size()) &&
        std::abs(static_cast<double>(ca[i + 1].time_ps) - tb) < gap;
    if (next_b_closer && !next_a_closer) {
      ++j;
      continue;
    }
    if (next_a_closer && !next_b_closer) {
      ++i;
      continue;
    }
    if (next_a_closer && next_b_closer) {
      // both have closer partners ahead; advance the earlier tag
      if (ta <= tb)
        ++i;
      else
        ++j;
      continue;
    }
    CoincidenceRecord rec;
    rec.a_bin = ca[i].bin;
    rec.b_bin = cb[j].bin;
    rec.a_time_ps = ca[i].time_ps;
    rec.b_time_ps = cb[j].time_ps;
    rec.cycle_index = static_cast<std::uint64_t>(
        (0.5 * (ta + tb)) / config.period_ps);
    res.records.push_back(rec);
    ++res.cells[static_cast<int>(rec.a_bin)][static_cast<int>(rec.b_bin)];
    ++paired;
    ++i;
    ++j;
  }
  res.unpaired_a = ca.size() - paired;
  res.unpaired_b = cb.size() - paired;
  return res;
}

Visibility visibility(double counts_max, double counts_min, double duration_max_s,
                      double duration_min_s) {
  if (duration_max_s <= 0.0 || duration_min_s <= 0.0)
    throw CoincError("durations must be positive");
  const double rmax = counts_max / duration_max_s;
  const double rmin = counts_min / duration_min_s;
  if (rmax + rmin <= 0.0) throw CoincError("visibility undefined: zero rates");
  Visibility v;
  v.percent = 100.0 * (rmax - rmin) / (rmax + rmin);
  // Poisson error propagation through V = (x-y)/(x+y)
  const double sx = std::sqrt(std::max(counts_max, 1.0)) / duration_max_s;
  const double sy = std::sqrt(std::max(counts_min, 1.0)) / duration_min_s;
  const double sum = rmax + rmin;
  const double dvdx = 2.0 * rmin / (sum * sum);
  const double dvdy = -2.0 * rmax / (sum * sum);
  v.error_percent = 100.0 * std::sqrt(dvdx * dvdx * sx * sx + dvdy * dvdy * sy * sy);
  return v;
}

FringeFit fit_fringe(const FringeScan& scan) {
  const std::size_t n = scan.control.size();
  if (n < 8 || scan.rates_hz.size() != n)
    throw CoincError("fringe fit needs >= 8 samples");

  const auto [lo, hi] =
      std::minmax_element(scan.control.begin(), scan.control.end());
  const double span = *hi - *lo;
  if (span <= 0.0) throw CoincError("fringe scan control values are constant");

  double mean = 0.0;
  for (double r : scan.rates_hz) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : scan.rates_hz) var += (r - mean) * (r - mean);

  FringeFit best;
  best.degenerate = var <= 0.0;
  if (best.degenerate) {
    best.offset = mean;
    best.residuals.assign(n, 0.0);
    return best;
  }

  // linear LS in (A, Bc, Bs) at fixed frequency; scan then refine
  auto solve_at = [&](double freq, FringeFit& out) {
    double s11 = n, s1c = 0, s1s = 0, scc = 0, sss = 0, scs = 0;
    double sy = 0, syc = 0, sys = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double c = std::cos(freq * scan.control[k]);
      const double s = std::sin(freq * scan.control[k]);
      s1c += c;
      s1s += s;
      scc += c * c;
      sss += s * s;
      scs += c * s;
      sy += scan.rates_hz[k];
      syc += scan.rates_hz[k] * c;
      sys += scan.rates_hz[k] * s;
    }
    // 3x3 normal equations by Cramer
    const double m[3][3] = {{s11, s1c, s1s}, {s1c, scc, scs}, {s1s, scs, sss}};
    const double rhs[3] = {sy, syc, sys};
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (std::abs(det) < 1e-12) return 1e300;
    auto det3 = [&](int col) {
      double t[3][3];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) t[r][c] = (c == col) ? rhs[r] : m[r][c];
      return t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1]) -
             t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0]) +
             t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0]);
    };
    const double A = det3(0) / det;
    const double Bc = det3(1) / det;
    const double Bs = det3(2) / det;
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double fit = A + Bc * std::cos(freq * scan.control[k]) +
                         Bs * std::sin(freq * scan.control[k]);
      const double r = scan.rates_hz[k] - fit;
      sse += r * r;
    }
    out.offset = A;
    out.amplitude = std::sqrt(Bc * Bc + Bs * Bs);
    out.frequency = freq;
    out.phase = std::atan2(-Bs, Bc);
    return sse;
  };

  // frequencies from half a period over the scan up to one period per
  // two samples
  const double f_lo = M_PI / span;
  const double f_hi = M_PI * static_cast<double>(n) / (2.0 * span);
  double best_sse = 1e300;
  const int coarse = 800;
  for (int k = 0; k <= coarse; ++k) {
    const double f = f_lo + (f_hi - f_lo) * k / coarse;
    FringeFit trial;
    const double sse = solve_at(f, trial);
    if (sse < best_sse) {
      best_sse = sse;
      best = trial;
    }
  }
  // golden-section refinement around the best coarse frequency
  double a = std::max(f_lo, best.frequency - 3.0 * (f_hi - f_lo) / coarse);
  double b = std::min(f_hi, best.frequency + 3.0 * (f_hi - f_lo) / coarse);
  const double gr = 0.6180339887498949;
  for (int it = 0; it < 60; ++it) {
    const double x1 = b - gr * (b - a);
    const double x2 = a + gr * (b - a);
    FringeFit t1, t2;
    if (solve_at(x1, t1) < solve_at(x2, t2))
      b = x2;
    else
      a = x1;
  }
  FringeFit refined;
  const double sse = solve_at(0.5 * (a + b), refined);
  if (sse < best_sse) {
    best = refined;
    best_sse = sse;
  }

  best.residuals.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    best.residuals[k] =
        scan.rates_hz[k] - (best.offset + best.amplitude * std::cos(best.frequency *
                                                                        scan.control[k] +
                                                                    best.phase));
  }
  double sse_final = 0.0;
  for (double r : best.residuals) sse_final += r * r;
  best.r_squared = var > 0.0 ? 1.0 - sse_final / var : 0.0;
  if (std::abs(best.amplitude) > std::abs(best.offset))
    best.amplitude = std::copysign(std::abs(best.offset), best.amplitude);
  return best;
}

PhaseLockResult phase_lock(
    const std::function<std::pair<double, double>(double)>& rate_oracle,
    LockTarget target, double initial_control, double step, int max_iters,
    double tolerance) {
  if (step <= 0.0) throw CoincError("phase_lock: step must be positive");
  PhaseLockResult res;
  const double sign = (target == LockTarget::Max) ? 1.0 : -1.0;

  auto query = [&](double control) {
    const auto [counts, duration] = rate_oracle(control);
    const double rate = counts / duration;
    res.trace.emplace_back(control, rate);
    return sign * rate;
  };

  double x = initial_control;
  double fx = query(x);
  double s = step;
  int dir = +1;
  int it = 0;
  for (; it < max_iters && s >= tolerance; ++it) {
    const double xn = x + dir * s;
    const double fn = query(xn);
    if (fn > fx) {
      x = xn;
      fx = fn;
    } else {
      dir = -dir;
      s *= 0.5;
    }
  }
  res.control = x;
  res.rate_hz = sign * fx;
  res.iterations = it;
  res.converged = s < tolerance;
  return res;
}

}  // namespace pairsim::coinc
