#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pairsim/constants.hpp"
#include "pairsim/parallel.hpp"

namespace pairsim::optics {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Temperature-dependent Sellmeier set for the extraordinary ray of
// 5%-MgO-doped congruent lithium niobate (Gayer et al. 2008), with
// f(T) = (T - 24.5)(T + 570.82), lambda in um, T in deg C:
//   n^2 = a1 + b1 f + (a2 + b2 f)/(l^2 - (a3 + b3 f)^2)
//       + (a4 + b4 f)/(l^2 - a5^2) - a6 l^2
struct CrystalSpec {
  double length_m = 0.01;                // waveguide length L
  double poling_period_m = 18.3e-6;      // Lambda; Gamma = 1/Lambda
  double temperature_c = 225.94;         // effective model temperature, see below
  double a[6] = {5.756, 0.0983, 0.2020, 189.32, 12.52, 1.32e-2};
  double b[4] = {2.860e-6, 4.700e-8, 6.113e-8, 1.516e-4};

  void validate() const;
};

// The lab crystal ran at 50.0 C, but the MgO doping fraction is unknown and
// temperature stands in for it as the model's alignment knob. With the
// published 5%-MgO coefficients, Lambda = 18.3 um quasi-phase-matches
// degenerate 769.78 nm -> 2x1539.56 nm at an effective 225.94 C, so that is
// the shipped default.
CrystalSpec default_crystal();

struct PumpSpec {
  double center_wavelength_nm = 769.78;
  double sigma_hz = 243e9 / 1.6651092223153954;  // FWHM / (2 sqrt(ln 2))
  double fwhm_hz() const { return sigma_hz * 1.6651092223153954; }
  static PumpSpec from_fwhm(double center_nm, double fwhm_hz);
  void validate() const;
};

struct FilterSpec {
  int itu_channel = 0;
  double center_frequency_hz = 0.0;
  double fwhm_hz = 82e9;
  int supergauss_order_m = 3;
  double peak_transmission_eta = 1.0;
  // measured transmission samples (frequency Hz, transmission); when
  // present they override the parametric shape
  std::vector<std::pair<double, double>> measured_curve;

  void validate() const;
};

// 82 GHz FWHM flat-top passband of a 100 GHz-spacing DWDM channel.
FilterSpec dwdm_filter(int itu_channel, double eta = 1.0, double fwhm_hz = 82e9);
// Partner filter on the other arm, centered so the pair is energy matched
// against the pump: f_partner = f_pump - f(channel).
FilterSpec energy_matched_partner(const FilterSpec& f, const PumpSpec& pump,
                                  double eta = 1.0);

struct JsiGrid {
  std::vector<double> signal_wavelengths_nm;  // strictly increasing
  std::vector<double> idler_wavelengths_nm;   // strictly increasing
  Eigen::MatrixXd intensity;  // rows: signal, cols: idler; pairs/nm^2/s

  void validate() const;
};

struct SchmidtResult {
  std::vector<double> coefficients;  // normalized, sum = 1
  double schmidt_number_k = 1.0;
  double inverse_k = 1.0;
};

enum class SchmidtMode {
  // SVD of the filtered JSI grid itself, singular values normalized to
  // unit sum and used as the Schmidt coefficients. This is what
  // reproduces the reported channel purities (0.87 at 82 GHz).
  Intensity,
  // SVD of the pointwise square root of the filtered JSI (flat spectral
  // phase assumed), coefficients s_k^2 / sum s^2.
  Amplitude,
};

// extraordinary refractive index n(lambda, T); lambda in (300, 5000) nm
double refractive_index(double lambda_nm, const CrystalSpec& crystal);

// Delta k = 2 pi (n_p/l_p - n_s/l_s - n_i/l_i - 1/Lambda), 1/m, with the
// pump wavelength fixed by 1/l_p = 1/l_s + 1/l_i
double phase_mismatch(double lambda_s_nm, double lambda_i_nm,
                      const CrystalSpec& crystal);

// sinc^2(dk L / 2) * exp(-(nu_p - nu_s - nu_i)^2 / sigma_p^2) * brightness
double jsi_intensity(double lambda_s_nm, double lambda_i_nm,
                     const CrystalSpec& crystal, const PumpSpec& pump,
                     double global_brightness = 1.0);

struct WavelengthRange {
  double lo_nm = 0.0;
  double hi_nm = 0.0;
};

JsiGrid build_jsi_grid(const CrystalSpec& crystal, const PumpSpec& pump,
                       WavelengthRange signal, WavelengthRange idler,
                       int resolution = 512, double global_brightness = 1.0,
                       Exec mode = exec_mode());

// Window covering one energy-matched channel pair with margin_mult x FWHM
// margins on each side (signal axis from the filter, idler axis from its
// energy-matched image).
JsiGrid build_channel_pair_grid(const CrystalSpec& crystal, const PumpSpec& pump,
                                const FilterSpec& signal_filter,
                                const FilterSpec& idler_filter,
                                int resolution = 512, double margin_mult = 3.0,
                                double global_brightness = 1.0,
                                Exec mode = exec_mode());

double filter_transmission(double frequency_hz, const FilterSpec& filter);

enum class Arm { Signal, Idler };

// S_u = trapezoidal integral of T_u(lambda_arm) |f|^2 over the grid, Hz
double singles_integral(const FilterSpec& filter, Arm arm, const JsiGrid& grid,
                        Exec mode = exec_mode());

// C_uv = integral of T_u(lambda_s) T_v(lambda_i) |f|^2, Hz
double coincidence_integral(const FilterSpec& filter_s, const FilterSpec& filter_i,
                            const JsiGrid& grid, Exec mode = exec_mode());

// mu = (1/R) integral of W_u W_v |f|^2 with the filters rescaled to unit peak
double mu_integral(const FilterSpec& filter_s, const FilterSpec& filter_i,
                   const JsiGrid& grid, double repetition_rate_hz,
                   Exec mode = exec_mode());

struct DeltaResult {
  double delta_given_idler = 0.0;   // two-filter capture / idler-filter capture
  double delta_given_signal = 0.0;  // two-filter capture / signal-filter capture
  double mean = 0.0;
};

// Geometric factor: ratio of the JSI captured by both unit-peak filters to
// the JSI captured by one of them.
DeltaResult delta_model(const FilterSpec& filter_s, const FilterSpec& filter_i,
                        const JsiGrid& grid, Exec mode = exec_mode());

SchmidtResult schmidt_decompose(const FilterSpec& filter_s,
                                const FilterSpec& filter_i, const JsiGrid& grid,
                                SchmidtMode mode = SchmidtMode::Intensity);

// Convenience: grid + decomposition for one energy-matched channel pair.
SchmidtResult schmidt_for_channel(const CrystalSpec& crystal, const PumpSpec& pump,
                                  int itu_channel, double filter_fwhm_hz = 82e9,
                                  int resolution = 512,
                                  SchmidtMode mode = SchmidtMode::Intensity);

struct FitParams {
  double crystal_temperature_c = 225.94;
  double pump_center_nm = 769.78;
  double pump_sigma_hz = 243e9 / 1.6651092223153954;
  std::map<int, double> path_efficiencies;  // ITU channel -> eta
  double global_brightness = 1.0;

  bool float_temperature = true;
  bool float_pump_center = false;
  bool float_pump_sigma = false;
  bool float_efficiencies = true;
  bool float_brightness = true;
};

struct RateData {
  // measured singles per channel, Hz; channels on the signal arm and the
  // idler arm are disjoint ITU numbers
  std::map<int, double> singles_signal;
  std::map<int, double> singles_idler;
  // measured coincidences for (signal channel, idler channel) pairs
  std::map<std::pair<int, int>, double> coincidences;
};

struct FitReport {
  FitParams best;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  // per-point relative residuals keyed like the inputs
  std::map<int, double> singles_residuals_signal;
  std::map<int, double> singles_residuals_idler;
  std::map<std::pair<int, int>, double> coincidence_residuals;
};

// Nelder-Mead least-squares fit of the JSI model to measured rates
// (sum of squared relative errors, multi-start).
FitReport fit_jsi(const RateData& measured, const FitParams& initial,
                  const CrystalSpec& crystal_fixed, double filter_fwhm_hz = 82e9,
                  int grid_resolution = 256, int max_iterations = 5000);

// Model rates for a parameter set (used by fit_jsi and by tests as the
// forward generator).
RateData model_rates(const FitParams& params, const CrystalSpec& crystal_fixed,
                     const std::vector<int>& signal_channels,
                     const std::vector<int>& idler_channels,
                     double filter_fwhm_hz = 82e9, int grid_resolution = 256);

// CSV export/import of a JSI grid: first row lists idler wavelengths, first
// column signal wavelengths, body is intensity.
void save_jsi_csv(const JsiGrid& grid, const std::string& path);
JsiGrid load_jsi_csv(const std::string& path);

}  // namespace pairsim::optics
