#include "pairsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pairsim/nelder_mead.hpp"
#include "pairsim/rng.hpp"

namespace pairsim::optics {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double trapezoid_weight(const std::vector<double>& axis, std::size_t i) {
  const std::size_t n = axis.size();
  if (n < 2) return 0.0;
  if (i == 0) return 0.5 * (axis[1] - axis[0]);
  if (i == n - 1) return 0.5 * (axis[n - 1] - axis[n - 2]);
  return 0.5 * (axis[i + 1] - axis[i - 1]);
}

}  // namespace

void CrystalSpec::validate() const {
  if (length_m <= 0.0) throw ConfigError("crystal length must be positive");
  if (poling_period_m <= 0.0) throw ConfigError("poling period must be positive");
  // The effective model temperature proxies the unknown MgO doping; the
  // quasi-phase-matched point for the shipped coefficients sits at 225.94 C.
  if (temperature_c < 0.0 || temperature_c > 300.0)
    throw ConfigError("crystal temperature outside [0, 300] C");
}

CrystalSpec default_crystal() { return CrystalSpec{}; }

PumpSpec PumpSpec::from_fwhm(double center_nm, double fwhm_hz) {
  PumpSpec p;
  p.center_wavelength_nm = center_nm;
  p.sigma_hz = fwhm_hz / (2.0 * std::sqrt(std::log(2.0)));
  return p;
}

void PumpSpec::validate() const {
  if (center_wavelength_nm <= 700.0 || center_wavelength_nm >= 800.0)
    throw ConfigError("pump center outside (700, 800) nm");
  if (sigma_hz <= 0.0) throw ConfigError("pump bandwidth must be positive");
}

void FilterSpec::validate() const {
  if (peak_transmission_eta < 0.0 || peak_transmission_eta > 1.0)
    throw ConfigError("filter peak transmission outside [0, 1]");
  if (fwhm_hz <= 0.0) throw ConfigError("filter FWHM must be positive");
  if (supergauss_order_m < 1) throw ConfigError("super-Gaussian order must be >= 1");
  for (const auto& [f, t] : measured_curve) {
    (void)f;
    if (t < 0.0 || t > 1.0)
      throw ConfigError("measured filter transmission outside [0, 1]");
  }
}

FilterSpec dwdm_filter(int itu_channel, double eta, double fwhm_hz) {
  FilterSpec f;
  f.itu_channel = itu_channel;
  f.center_frequency_hz = ituChannelFrequencyHz(itu_channel);
  f.fwhm_hz = fwhm_hz;
  f.peak_transmission_eta = eta;
  return f;
}

FilterSpec energy_matched_partner(const FilterSpec& f, const PumpSpec& pump,
                                  double eta) {
  FilterSpec p = f;
  p.itu_channel = -f.itu_channel;  // synthetic label for the mirrored filter
  p.center_frequency_hz =
      wavelengthToFrequencyHz(pump.center_wavelength_nm) - f.center_frequency_hz;
  p.peak_transmission_eta = eta;
  p.measured_curve.clear();
  return p;
}

void JsiGrid::validate() const {
  const auto strictly_increasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] <= v[i - 1]) return false;
    return true;
  };
  if (!strictly_increasing(signal_wavelengths_nm) ||
      !strictly_increasing(idler_wavelengths_nm))
    throw ConfigError("grid axes must be strictly increasing");
  if (intensity.rows() != static_cast<Eigen::Index>(signal_wavelengths_nm.size()) ||
      intensity.cols() != static_cast<Eigen::Index>(idler_wavelengths_nm.size()))
    throw ConfigError("grid dimensions do not match axes");
  if ((intensity.array() < 0.0).any())
    throw ConfigError("grid intensity must be nonnegative");
}

double refractive_index(double lambda_nm, const CrystalSpec& crystal) {
  if (lambda_nm <= 300.0 || lambda_nm >= 5000.0)
    throw DomainError("wavelength outside Sellmeier validity range (0.3-5 um)");
  const double lam = lambda_nm * 1e-3;  // um
  const double lam2 = lam * lam;
  const double T = crystal.temperature_c;
  const double f = (T - 24.5) * (T + 570.82);
  const double* a = crystal.a;
  const double* b = crystal.b;
  const double res = a[2] + b[2] * f;
  const double n2 = a[0] + b[0] * f + (a[1] + b[1] * f) / (lam2 - res * res) +
                    (a[3] + b[3] * f) / (lam2 - a[4] * a[4]) - a[5] * lam2;
  return std::sqrt(n2);
}

double phase_mismatch(double lambda_s_nm, double lambda_i_nm,
                      const CrystalSpec& crystal) {
  const double lambda_p_nm = 1.0 / (1.0 / lambda_s_nm + 1.0 / lambda_i_nm);
  const double np = refractive_index(lambda_p_nm, crystal);
  const double ns = refractive_index(lambda_s_nm, crystal);
  const double ni = refractive_index(lambda_i_nm, crystal);
  // per meter; wavelengths held in nm
  const double gamma = 1.0 / crystal.poling_period_m;
  return 2.0 * M_PI *
         ((np / lambda_p_nm - ns / lambda_s_nm - ni / lambda_i_nm) * 1e9 - gamma);
}

double jsi_intensity(double lambda_s_nm, double lambda_i_nm,
                     const CrystalSpec& crystal, const PumpSpec& pump,
                     double global_brightness) {
  const double dk = phase_mismatch(lambda_s_nm, lambda_i_nm, crystal);
  const double ph = sinc(0.5 * dk * crystal.length_m);
  const double detune = wavelengthToFrequencyHz(pump.center_wavelength_nm) -
                        wavelengthToFrequencyHz(lambda_s_nm) -
                        wavelengthToFrequencyHz(lambda_i_nm);
  const double x = detune / pump.sigma_hz;
  return global_brightness * ph * ph * std::exp(-x * x);
}

JsiGrid build_jsi_grid(const CrystalSpec& crystal, const PumpSpec& pump,
                       WavelengthRange signal, WavelengthRange idler,
                       int resolution, double global_brightness, Exec mode) {
  if (resolution < 64) throw ConfigError("grid resolution must be >= 64");
  crystal.validate();
  pump.validate();
  JsiGrid g;
  g.signal_wavelengths_nm.resize(resolution);
  g.idler_wavelengths_nm.resize(resolution);
  for (int i = 0; i < resolution; ++i) {
    const double t = static_cast<double>(i) / (resolution - 1);
    g.signal_wavelengths_nm[i] = signal.lo_nm + t * (signal.hi_nm - signal.lo_nm);
    g.idler_wavelengths_nm[i] = idler.lo_nm + t * (idler.hi_nm - idler.lo_nm);
  }
  g.intensity.resize(resolution, resolution);
  parallel_for(
      static_cast<std::size_t>(resolution),
      [&](std::size_t r) {
        const double ls = g.signal_wavelengths_nm[r];
        for (int c = 0; c < resolution; ++c) {
          g.intensity(static_cast<Eigen::Index>(r), c) = jsi_intensity(
              ls, g.idler_wavelengths_nm[c], crystal, pump, global_brightness);
        }
      },
      mode);
  return g;
}

JsiGrid build_channel_pair_grid(const CrystalSpec& crystal, const PumpSpec& pump,
                                const FilterSpec& signal_filter,
                                const FilterSpec& idler_filter, int resolution,
                                double margin_mult, double global_brightness,
                                Exec mode) {
  const double half_s = margin_mult * signal_filter.fwhm_hz;
  const double half_i = margin_mult * idler_filter.fwhm_hz;
  WavelengthRange s{frequencyToWavelengthNm(signal_filter.center_frequency_hz + half_s),
                    frequencyToWavelengthNm(signal_filter.center_frequency_hz - half_s)};
  WavelengthRange i{frequencyToWavelengthNm(idler_filter.center_frequency_hz + half_i),
                    frequencyToWavelengthNm(idler_filter.center_frequency_hz - half_i)};
  return build_jsi_grid(crystal, pump, s, i, resolution, global_brightness, mode);
}

double filter_transmission(double frequency_hz, const FilterSpec& filter) {
  if (!filter.measured_curve.empty()) {
    const auto& c = filter.measured_curve;
    if (frequency_hz <= c.front().first || frequency_hz >= c.back().first) {
      // exactly at the end points still counts
      if (frequency_hz == c.front().first) return c.front().second;
      if (frequency_hz == c.back().first) return c.back().second;
      return 0.0;
    }
    auto it = std::lower_bound(
        c.begin(), c.end(), frequency_hz,
        [](const std::pair<double, double>& s, double f) { return s.first < f; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (frequency_hz - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
  }
  // super-Gaussian with sigma chosen so the FWHM matches the spec
  const double m = filter.supergauss_order_m;
  const double sigma =
      0.5 * filter.fwhm_hz / std::pow(std::log(2.0), 1.0 / (2.0 * m));
  const double x = std::abs(frequency_hz - filter.center_frequency_hz) / sigma;
  return filter.peak_transmission_eta * std::exp(-std::pow(x, 2.0 * m));
}

namespace {

// Filter transmission sampled along a wavelength axis.
std::vector<double> filter_on_axis(const FilterSpec& f,
                                   const std::vector<double>& axis_nm) {
  std::vector<double> t(axis_nm.size());
  for (std::size_t i = 0; i < axis_nm.size(); ++i)
    t[i] = filter_transmission(wavelengthToFrequencyHz(axis_nm[i]), f);
  return t;
}

void check_coverage(const FilterSpec& f, const std::vector<double>& axis_nm) {
  const double f_lo = wavelengthToFrequencyHz(axis_nm.back());
  const double f_hi = wavelengthToFrequencyHz(axis_nm.front());
  if (!f.measured_curve.empty()) return;
  const double band_lo = f.center_frequency_hz - 0.5 * f.fwhm_hz;
  const double band_hi = f.center_frequency_hz + 0.5 * f.fwhm_hz;
  const bool inside = band_lo >= f_lo && band_hi <= f_hi;
  const bool covers_grid = band_lo <= f_lo && band_hi >= f_hi;  // all-pass
  if (!inside && !covers_grid)
    throw CoverageError("filter passband clipped by grid bounds");
}

// integral of ws(ls) wi(li) F(ls, li) dls dli by trapezoid, deterministic
// row-blocked reduction
double weighted_integral(const JsiGrid& g, const std::vector<double>& ws,
                         const std::vector<double>& wi, Exec mode) {
  const auto& sA = g.signal_wavelengths_nm;
  const auto& iA = g.idler_wavelengths_nm;
  std::vector<double> col_w(iA.size());
  for (std::size_t c = 0; c < iA.size(); ++c)
    col_w[c] = wi[c] * trapezoid_weight(iA, c);
  return deterministic_sum(
      sA.size(),
      [&](std::size_t r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < iA.size(); ++c)
          acc += col_w[c] * g.intensity(static_cast<Eigen::Index>(r),
                                        static_cast<Eigen::Index>(c));
        return acc * ws[r] * trapezoid_weight(sA, r);
      },
      mode);
}

}  // namespace

double singles_integral(const FilterSpec& filter, Arm arm, const JsiGrid& grid,
                        Exec mode) {
  grid.validate();
  const auto& axis = (arm == Arm::Signal) ? grid.signal_wavelengths_nm
                                          : grid.idler_wavelengths_nm;
  check_coverage(filter, axis);
  std::vector<double> ones_s(grid.signal_wavelengths_nm.size(), 1.0);
  std::vector<double> ones_i(grid.idler_wavelengths_nm.size(), 1.0);
  if (arm == Arm::Signal) {
    return weighted_integral(grid, filter_on_axis(filter, grid.signal_wavelengths_nm),
                             ones_i, mode);
  }
  return weighted_integral(grid, ones_s,
                           filter_on_axis(filter, grid.idler_wavelengths_nm), mode);
}

double coincidence_integral(const FilterSpec& filter_s, const FilterSpec& filter_i,
                            const JsiGrid& grid, Exec mode) {
  grid.validate();
  check_coverage(filter_s, grid.signal_wavelengths_nm);
  check_coverage(filter_i, grid.idler_wavelengths_nm);
  return weighted_integral(grid, filter_on_axis(filter_s, grid.signal_wavelengths_nm),
                           filter_on_axis(filter_i, grid.idler_wavelengths_nm), mode);
}

namespace {

FilterSpec unit_peak(const FilterSpec& f) {
  FilterSpec w = f;
  if (!w.measured_curve.empty()) {
    double peak = 0.0;
    for (const auto& [freq, t] : w.measured_curve) peak = std::max(peak, t);
    if (peak <= 0.0) throw ConfigError("measured filter curve has zero peak");
    for (auto& [freq, t] : w.measured_curve) t /= peak;
  } else {
    if (w.peak_transmission_eta <= 0.0)
      throw ConfigError("degenerate filter: zero peak transmission");
    w.peak_transmission_eta = 1.0;
  }
  return w;
}

}  // namespace

double mu_integral(const FilterSpec& filter_s, const FilterSpec& filter_i,
                   const JsiGrid& grid, double repetition_rate_hz, Exec mode) {
  return coincidence_integral(unit_peak(filter_s), unit_peak(filter_i), grid, mode) /
         repetition_rate_hz;
}

DeltaResult delta_model(const FilterSpec& filter_s, const FilterSpec& filter_i,
                        const JsiGrid& grid, Exec mode) {
  const FilterSpec ws = unit_peak(filter_s);
  const FilterSpec wi = unit_peak(filter_i);
  const double both = coincidence_integral(ws, wi, grid, mode);
  const double only_i = singles_integral(wi, Arm::Idler, grid, mode);
  const double only_s = singles_integral(ws, Arm::Signal, grid, mode);
  if (only_i <= 0.0 || only_s <= 0.0)
    throw CoverageError("degenerate filter: single-filter capture is zero");
  DeltaResult d;
  d.delta_given_idler = both / only_i;
  d.delta_given_signal = both / only_s;
  d.mean = 0.5 * (d.delta_given_idler + d.delta_given_signal);
  return d;
}

SchmidtResult schmidt_decompose(const FilterSpec& filter_s,
                                const FilterSpec& filter_i, const JsiGrid& grid,
                                SchmidtMode mode) {
  grid.validate();
  const auto ts = filter_on_axis(filter_s, grid.signal_wavelengths_nm);
  const auto ti = filter_on_axis(filter_i, grid.idler_wavelengths_nm);
  Eigen::MatrixXd m = grid.intensity;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) *= ts[r] * ti[c];
  if (mode == SchmidtMode::Amplitude) m = m.array().sqrt().matrix();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0)
    throw CoverageError("all-zero filtered grid: Schmidt decomposition undefined");

  SchmidtResult res;
  double norm = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    // In intensity mode the grid plays the role of the squared amplitude:
    // singular values are the Schmidt weights themselves. In amplitude mode
    // the weights are the squared singular values.
    const double w = (mode == SchmidtMode::Intensity) ? s(i) : s(i) * s(i);
    res.coefficients.push_back(w);
    norm += w;
  }
  double inv_k = 0.0;
  for (auto& c : res.coefficients) {
    c /= norm;
    inv_k += c * c;
  }
  res.inverse_k = inv_k;
  res.schmidt_number_k = 1.0 / inv_k;
  return res;
}

SchmidtResult schmidt_for_channel(const CrystalSpec& crystal, const PumpSpec& pump,
                                  int itu_channel, double filter_fwhm_hz,
                                  int resolution, SchmidtMode mode) {
  const FilterSpec fs = dwdm_filter(itu_channel, 1.0, filter_fwhm_hz);
  const FilterSpec fi = energy_matched_partner(fs, pump);
  const JsiGrid grid =
      build_channel_pair_grid(crystal, pump, fs, fi, resolution, 3.0);
  return schmidt_decompose(fs, fi, grid, mode);
}

// ---------------------------------------------------------------------------
// Model rates and fitting

namespace {

struct GlobalGrid {
  JsiGrid grid;
  std::vector<int> signal_channels;
  std::vector<int> idler_channels;
};

GlobalGrid build_global_grid(const FitParams& p, const CrystalSpec& fixed,
                             const std::vector<int>& signal_channels,
                             const std::vector<int>& idler_channels,
                             double filter_fwhm_hz, int resolution) {
  CrystalSpec crystal = fixed;
  crystal.temperature_c = p.crystal_temperature_c;
  PumpSpec pump;
  pump.center_wavelength_nm = p.pump_center_nm;
  pump.sigma_hz = p.pump_sigma_hz;

  const auto [smin, smax] =
      std::minmax_element(signal_channels.begin(), signal_channels.end());
  const auto [imin, imax] =
      std::minmax_element(idler_channels.begin(), idler_channels.end());
  const double margin = 3.0 * filter_fwhm_hz + 2.0 * pump.sigma_hz;
  WavelengthRange s{
      frequencyToWavelengthNm(ituChannelFrequencyHz(*smax) + margin),
      frequencyToWavelengthNm(ituChannelFrequencyHz(*smin) - margin)};
  WavelengthRange i{
      frequencyToWavelengthNm(ituChannelFrequencyHz(*imax) + margin),
      frequencyToWavelengthNm(ituChannelFrequencyHz(*imin) - margin)};
  GlobalGrid g{build_jsi_grid(crystal, pump, s, i, resolution, p.global_brightness),
               signal_channels, idler_channels};
  return g;
}

}  // namespace

RateData model_rates(const FitParams& params, const CrystalSpec& crystal_fixed,
                     const std::vector<int>& signal_channels,
                     const std::vector<int>& idler_channels,
                     double filter_fwhm_hz, int grid_resolution) {
  const GlobalGrid g = build_global_grid(params, crystal_fixed, signal_channels,
                                         idler_channels, filter_fwhm_hz,
                                         grid_resolution);
  RateData out;
  auto eta_of = [&](int ch) {
    auto it = params.path_efficiencies.find(ch);
    return it == params.path_efficiencies.end() ? 1.0 : it->second;
  };
  for (int sc : signal_channels) {
    const FilterSpec f = dwdm_filter(sc, eta_of(sc), filter_fwhm_hz);
    out.singles_signal[sc] = singles_integral(f, Arm::Signal, g.grid);
  }
  for (int ic : idler_channels) {
    const FilterSpec f = dwdm_filter(ic, eta_of(ic), filter_fwhm_hz);
    out.singles_idler[ic] = singles_integral(f, Arm::Idler, g.grid);
  }
  for (int sc : signal_channels) {
    const FilterSpec fs = dwdm_filter(sc, eta_of(sc), filter_fwhm_hz);
    for (int ic : idler_channels) {
      const FilterSpec fi = dwdm_filter(ic, eta_of(ic), filter_fwhm_hz);
      out.coincidences[{sc, ic}] = coincidence_integral(fs, fi, g.grid);
    }
  }
  return out;
}

FitReport fit_jsi(const RateData& measured, const FitParams& initial,
                  const CrystalSpec& crystal_fixed, double filter_fwhm_hz,
                  int grid_resolution, int max_iterations) {
  std::vector<int> signal_channels, idler_channels;
  for (const auto& [ch, v] : measured.singles_signal) signal_channels.push_back(ch);
  for (const auto& [ch, v] : measured.singles_idler) idler_channels.push_back(ch);
  if (signal_channels.empty() || idler_channels.empty())
    throw ConfigError("fit needs singles on both arms");

  // pack floating parameters
  std::vector<int> eta_channels;
  for (const auto& [ch, v] : initial.path_efficiencies) eta_channels.push_back(ch);
  std::vector<double> x0;
  if (initial.float_temperature) x0.push_back(initial.crystal_temperature_c);
  if (initial.float_pump_center) x0.push_back(initial.pump_center_nm);
  if (initial.float_pump_sigma) x0.push_back(initial.pump_sigma_hz / 1e9);
  if (initial.float_brightness) x0.push_back(std::log(initial.global_brightness));
  if (initial.float_efficiencies)
    for (int ch : eta_channels) x0.push_back(initial.path_efficiencies.at(ch));

  auto unpack = [&](const std::vector<double>& x) {
    FitParams p = initial;
    std::size_t k = 0;
    if (p.float_temperature) p.crystal_temperature_c = x[k++];
    if (p.float_pump_center) p.pump_center_nm = x[k++];
    if (p.float_pump_sigma) p.pump_sigma_hz = x[k++] * 1e9;
    if (p.float_brightness) p.global_brightness = std::exp(x[k++]);
    if (p.float_efficiencies)
      for (int ch : eta_channels)
        p.path_efficiencies[ch] = std::clamp(x[k++], 1e-6, 1.0);
    return p;
  };

  std::size_t n_points = measured.singles_signal.size() +
                         measured.singles_idler.size() +
                         measured.coincidences.size();
  if (!x0.empty() && n_points < x0.size())
    throw ConfigError("fewer data points than floating parameters");

  auto objective = [&](const std::vector<double>& x) {
    FitParams p = unpack(x);
    if (p.crystal_temperature_c < 0.0 || p.crystal_temperature_c > 300.0)
      return 1e12;
    RateData m;
    try {
      m = model_rates(p, crystal_fixed, signal_channels, idler_channels,
                      filter_fwhm_hz, grid_resolution);
    } catch (const std::exception&) {
      return 1e12;
    }
    double sse = 0.0;
    for (const auto& [ch, v] : measured.singles_signal) {
      const double r = (m.singles_signal.at(ch) - v) / (v != 0.0 ? v : 1.0);
      sse += r * r;
    }
    for (const auto& [ch, v] : measured.singles_idler) {
      const double r = (m.singles_idler.at(ch) - v) / (v != 0.0 ? v : 1.0);
      sse += r * r;
    }
    for (const auto& [key, v] : measured.coincidences) {
      const double r = (m.coincidences.at(key) - v) / (v != 0.0 ? v : 1.0);
      sse += r * r;
    }
    return sse;
  };

  FitReport report;
  report.best = initial;
  if (x0.empty()) {
    report.objective = objective(x0);
    report.converged = true;
  } else {
    // multi-start: nominal plus two jittered starts
    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    Rng jitter(0x5eedf17u, "fit-jsi-multistart");
    for (int s = 0; s < 3; ++s) {
      std::vector<double> start = x0;
      if (s > 0)
        for (auto& v : start) v *= 1.0 + 0.05 * (jitter.uniform() - 0.5);
      auto r = nelder_mead(objective, start, 0.08, max_iterations, 1e-8);
      if (r.value < best.value) best = r;
    }
    report.best = unpack(best.x);
    report.objective = best.value;
    report.converged = best.converged;
    report.iterations = best.iterations;
  }

  // residual report at the returned parameters
  RateData m = model_rates(report.best, crystal_fixed, signal_channels,
                           idler_channels, filter_fwhm_hz, grid_resolution);
  for (const auto& [ch, v] : measured.singles_signal)
    report.singles_residuals_signal[ch] =
        (m.singles_signal.at(ch) - v) / (v != 0.0 ? v : 1.0);
  for (const auto& [ch, v] : measured.singles_idler)
    report.singles_residuals_idler[ch] =
        (m.singles_idler.at(ch) - v) / (v != 0.0 ? v : 1.0);
  for (const auto& [key, v] : measured.coincidences)
    report.coincidence_residuals[key] =
        (m.coincidences.at(key) - v) / (v != 0.0 ? v : 1.0);
  return report;
}

void save_jsi_csv(const JsiGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out.precision(17);
  out << "0";
  for (double li : grid.idler_wavelengths_nm) out << "," << li;
  out << "\n";
  for (std::size_t r = 0; r < grid.signal_wavelengths_nm.size(); ++r) {
    out << grid.signal_wavelengths_nm[r];
    for (Eigen::Index c = 0; c < grid.intensity.cols(); ++c)
      out << "," << grid.intensity(static_cast<Eigen::Index>(r), c);
    out << "\n";
  }
}

JsiGrid load_jsi_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  JsiGrid g;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty JSI CSV");
  {
    std::stringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        first = false;
        continue;
      }
      g.idler_wavelengths_nm.push_back(std::stod(cell));
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    g.signal_wavelengths_nm.push_back(std::stod(cell));
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != g.idler_wavelengths_nm.size())
      throw ConfigError("ragged JSI CSV row");
    rows.push_back(std::move(row));
  }
  g.intensity.resize(rows.size(), g.idler_wavelengths_nm.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      g.intensity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
  g.validate();
  return g;
}

}  // namespace pairsim::optics
