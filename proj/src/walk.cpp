#include "pairsim/walk.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pairsim::walk {

Hist2D build_hist2d(const tags::Stream& stream, double period_ps, double x_bin_ps,
                    const YBinSpec& y, Exec mode) {
  if (!tags::is_sorted(stream)) throw WalkError("stream must be sorted");
  if (y.rows < 2 || y.hi_ps <= y.lo_ps) throw WalkError("bad y bin spec");

  Hist2D h;
  h.period_ps = period_ps;
  h.x_bin_ps = x_bin_ps;
  const std::size_t nx =
      static_cast<std::size_t>(std::ceil(period_ps / x_bin_ps));
  h.y_edges_ps.resize(y.rows + 1);
  for (int i = 0; i <= y.rows; ++i) {
    const double t = static_cast<double>(i) / y.rows;
    h.y_edges_ps[i] = y.logarithmic
                          ? y.lo_ps * std::pow(y.hi_ps / y.lo_ps, t)
                          : y.lo_ps + t * (y.hi_ps - y.lo_ps);
  }
  h.counts.assign(y.rows, std::vector<std::uint32_t>(nx, 0));
  if (stream.size() < 2) return h;

  const double log_lo = std::log(y.lo_ps);
  const double log_span = std::log(y.hi_ps) - log_lo;

  // partial histograms per chunk, merged in chunk order
  const std::size_t n = stream.size() - 1;
  const std::size_t chunk = 1 << 18;
  const std::size_t nchunks = (n + chunk - 1) / chunk;
  std::vector<Hist2D> partials(nchunks);
  parallel_for(
      nchunks,
      [&](std::size_t c) {
        auto& p = partials[c];
        p.counts.assign(y.rows, std::vector<std::uint32_t>(nx, 0));
        const std::size_t lo = c * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) {
          const double t = static_cast<double>(stream[i + 1].time_ps);
          const double gap = t - static_cast<double>(stream[i].time_ps);
          if (gap < y.lo_ps || gap >= y.hi_ps) continue;
          std::size_t row;
          if (y.logarithmic) {
            row = static_cast<std::size_t>((std::log(gap) - log_lo) / log_span *
                                           y.rows);
          } else {
            row = static_cast<std::size_t>((gap - y.lo_ps) /
                                           (y.hi_ps - y.lo_ps) * y.rows);
          }
          row = std::min(row, static_cast<std::size_t>(y.rows - 1));
          const double folded = std::fmod(t, period_ps);
          std::size_t xb = static_cast<std::size_t>(folded / x_bin_ps);
          xb = std::min(xb, nx - 1);
          ++p.counts[row][xb];
        }
      },
      mode);
  for (const auto& p : partials)
    for (int r = 0; r < y.rows; ++r)
      for (std::size_t xb = 0; xb < nx; ++xb) h.counts[r][xb] += p.counts[r][xb];
  return h;
}

double WalkTable::correction(double t_prime) const {
  if (t_prime_ps.empty()) return 0.0;
  if (valid_below_ps > 0.0 && t_prime >= valid_below_ps) return 0.0;
  if (t_prime <= t_prime_ps.front()) return correction_ps.front();
  if (t_prime >= t_prime_ps.back()) return correction_ps.back();
  auto it = std::upper_bound(t_prime_ps.begin(), t_prime_ps.end(), t_prime);
  const std::size_t hi = static_cast<std::size_t>(it - t_prime_ps.begin());
  const std::size_t lo = hi - 1;
  const double f =
      (t_prime - t_prime_ps[lo]) / (t_prime_ps[hi] - t_prime_ps[lo]);
  return correction_ps[lo] + f * (correction_ps[hi] - correction_ps[lo]);
}

namespace {

// circular SAD between a row and the template shifted by s x-bins
double circular_sad(const std::vector<double>& row,
                    const std::vector<double>& tmpl, std::size_t s) {
  const std::size_t n = row.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + n - s % n) % n;
    acc += std::abs(row[i] - tmpl[j]);
  }
  return acc;
}

std::vector<double> normalized(const std::vector<std::uint32_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += c;
  std::vector<double> out(counts.size(), 0.0);
  if (total > 0.0)
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / total;
  return out;
}

}  // namespace

WalkTable calibrate(const Hist2D& hist, const CalibrationConfig& config) {
  const std::size_t nx = hist.x_bins();
  if (nx == 0 || hist.rows() == 0) throw WalkError("empty histogram");

  // template: normalized sum of the large-t' rows
  std::vector<std::uint32_t> tmpl_counts(nx, 0);
  std::uint64_t tmpl_total = 0;
  for (std::size_t r = 0; r < hist.rows(); ++r) {
    const double yc = hist.y_center(r);
    if (yc < config.template_lo_ps || yc > config.template_hi_ps) continue;
    for (std::size_t i = 0; i < nx; ++i) tmpl_counts[i] += hist.counts[r][i];
    for (std::size_t i = 0; i < nx; ++i) tmpl_total += hist.counts[r][i];
  }
  if (tmpl_total == 0) throw WalkError("empty template: no counts at large t'");
  const std::vector<double> tmpl = normalized(tmpl_counts);

  struct RowFit {
    double shift_bins = 0.0;  // refined, in x-bins, within [0, nx)
    bool valid = false;
    bool flagged = false;
  };
  std::vector<RowFit> fits(hist.rows());

  // SAD per row is independent; rows are refined in parallel and unwrapped
  // serially afterwards
  parallel_for(hist.rows(), [&](std::size_t r) {
    std::uint64_t row_total = 0;
    for (auto c : hist.counts[r]) row_total += c;
    if (row_total < config.min_row_counts) return;
    const std::vector<double> row = normalized(hist.counts[r]);
    std::vector<double> sad(nx);
    for (std::size_t s = 0; s < nx; ++s) sad[s] = circular_sad(row, tmpl, s);

    // smallest-|shift| minimizer wins ties (shift 0 ~ no distortion)
    std::size_t best = 0;
    double best_val = sad[0];
    auto shift_mag = [&](std::size_t s) {
      return std::min<double>(s, nx - s);
    };
    for (std::size_t s = 1; s < nx; ++s) {
      if (sad[s] < best_val - 1e-15 ||
          (std::abs(sad[s] - best_val) <= 1e-15 &&
           shift_mag(s) < shift_mag(best))) {
        best_val = sad[s];
        best = s;
      }
    }
    // flag near-degenerate global minima away from the winner
    double runner = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < nx; ++s) {
      const std::size_t d = (s + nx - best) % nx;
      if (d > 2 && d < nx - 2) runner = std::min(runner, sad[s]);
    }
    const double spread = *std::max_element(sad.begin(), sad.end()) - best_val;
    bool flagged = false;
    if (spread > 0.0 && (runner - best_val) / spread < config.tie_tolerance)
      flagged = true;

    // parabolic sub-bin refinement around the minimum
    const double sm = sad[(best + nx - 1) % nx];
    const double s0 = sad[best];
    const double sp = sad[(best + 1) % nx];
    double frac = 0.0;
    const double denom = sm - 2.0 * s0 + sp;
    if (denom > 1e-15) frac = 0.5 * (sm - sp) / denom;
    fits[r] = {static_cast<double>(best) + frac, true, flagged};
  });

  // unwrap from large t' downward; the template region anchors zero
  WalkTable table;
  table.valid_below_ps = config.template_lo_ps;
  double prev = 0.0;
  std::vector<double> shifts(hist.rows(), 0.0);
  std::vector<bool> have(hist.rows(), false);
  for (std::size_t ri = hist.rows(); ri-- > 0;) {
    if (!fits[ri].valid) continue;
    double d = fits[ri].shift_bins * hist.x_bin_ps;
    const double period = hist.period_ps;
    // choose the branch closest to the previous (larger-t') row
    while (d - prev > period / 2.0) d -= period;
    while (d - prev < -period / 2.0) d += period;
    shifts[ri] = d;
    have[ri] = true;
    prev = d;
  }
  // sparse rows inherit the nearest valid row
  for (std::size_t r = 0; r < hist.rows(); ++r) {
    double d = 0.0;
    if (have[r]) {
      d = shifts[r];
    } else {
      long best = -1;
      for (long o = 1; o < static_cast<long>(hist.rows()); ++o) {
        if (r >= static_cast<std::size_t>(o) && have[r - o]) {
          best = static_cast<long>(r) - o;
          break;
        }
        if (r + o < hist.rows() && have[r + o]) {
          best = static_cast<long>(r) + o;
          break;
        }
      }
      if (best >= 0) d = shifts[best];
    }
    table.t_prime_ps.push_back(hist.y_center(r));
    table.correction_ps.push_back(d);
    table.flagged.push_back(fits[r].flagged ? 1 : 0);
  }
  return table;
}

tags::Stream apply_correction(const tags::Stream& stream, const WalkTable& table,
                              Exec mode) {
  if (!tags::is_sorted(stream)) throw WalkError("stream must be sorted");
  tags::Stream out(stream.size());
  if (stream.empty()) return out;
  out[0] = stream[0];
  // gaps come from the input stream, so chunks only need their predecessor
  parallel_for(
      stream.size() - 1,
      [&](std::size_t k) {
        const std::size_t i = k + 1;
        const double gap = static_cast<double>(stream[i].time_ps) -
                           static_cast<double>(stream[i - 1].time_ps);
        const double corrected =
            static_cast<double>(stream[i].time_ps) - table.correction(gap);
        out[i] = {stream[i].channel,
                  static_cast<std::uint64_t>(std::llround(std::max(0.0, corrected)))};
      },
      mode);
  if (!tags::is_sorted(out)) {
    std::sort(out.begin(), out.end(),
              [](const tags::TimeTag& a, const tags::TimeTag& b) {
                return a.time_ps < b.time_ps;
              });
  }
  return out;
}

tags::Stream dead_time_filter(const tags::Stream& stream, double dead_ps) {
  if (!tags::is_sorted(stream)) throw WalkError("stream must be sorted");
  tags::Stream out;
  out.reserve(stream.size());
  double last = -1e18;
  for (const auto& t : stream) {
    const double ts = static_cast<double>(t.time_ps);
    if (ts - last < dead_ps) continue;
    out.push_back(t);
    last = ts;
  }
  return out;
}

void save_walk_table(const WalkTable& table, const std::string& path,
                     double period_ps, double x_bin_ps) {
  std::ofstream out(path);
  if (!out) throw WalkError("cannot open " + path + " for writing");
  out.precision(17);
  out << "# time-walk lookup table\n";
  out << "# period_ps=" << period_ps << " x_bin_ps=" << x_bin_ps
      << " valid_below_ps=" << table.valid_below_ps << "\n";
  out << "t_prime_ps,correction_ps\n";
  for (std::size_t i = 0; i < table.t_prime_ps.size(); ++i)
    out << table.t_prime_ps[i] << "," << table.correction_ps[i] << "\n";
}

WalkTable load_walk_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw WalkError("cannot open " + path);
  WalkTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      const auto pos = line.find("valid_below_ps=");
      if (pos != std::string::npos)
        t.valid_below_ps = std::stod(line.substr(pos + 15));
      continue;
    }
    if (line.rfind("t_prime_ps", 0) == 0) continue;
    std::stringstream ss(line);
    std::string a, b;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    t.t_prime_ps.push_back(std::stod(a));
    t.correction_ps.push_back(std::stod(b));
    t.flagged.push_back(0);
  }
  return t;
}

}  // namespace pairsim::walk
