#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pairsim/coincidence.hpp"
#include "pairsim/rates.hpp"

namespace pairsim::tomo {

struct TomoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Matrix4 = Eigen::Matrix4cd;

// One measurement operator: counts accumulate as duration * scale * Tr(M rho).
struct Projector {
  std::string label;
  Matrix4 op;
};

struct TomoCounts {
  std::vector<Projector> projectors;  // 16 rows
  std::vector<double> counts;

  void validate() const;
};

// Phase assignments of the three tomography settings as (Alice, Bob)
// interferometer phases; the total phase runs through pi, pi/2, 0 for the
// fringe minimum / halfway / maximum.
struct PhaseSettings {
  std::array<double, 2> setting_a{M_PI / 2.0, M_PI / 2.0};  // total pi
  std::array<double, 2> setting_b{M_PI / 2.0, 0.0};         // total pi/2
  std::array<double, 2> setting_c{0.0, 0.0};                // total 0
};

// Detection-amplitude model of one station's monitored port: early/middle/
// late bins with short- and long-arm amplitudes.
struct StationAmplitudes {
  double short_amp = 0.5;
  double long_amp = 0.5;
};

// Operators of the nine bin-pair cells at one phase setting.
std::array<std::array<Matrix4, 3>, 3> cell_operators(
    double theta_a, double theta_b, const StationAmplitudes& a = {},
    const StationAmplitudes& b = {});

// Maps the three 9-cell matrices (counts) into the 16-row vector. Rows that
// repeat across settings (the timing corners and the duplicated 90-degree
// middle rows) are averaged after duration normalization.
TomoCounts assemble_counts(
    const std::array<std::array<std::uint64_t, 3>, 3>& cells_a,
    const std::array<std::array<std::uint64_t, 3>, 3>& cells_b,
    const std::array<std::array<std::uint64_t, 3>, 3>& cells_c,
    double duration_a_s, double duration_b_s, double duration_c_s,
    const PhaseSettings& phases = PhaseSettings{},
    const StationAmplitudes& amp_a = {}, const StationAmplitudes& amp_b = {});

// Canonical informationally complete two-qubit set {e, l, +, +i} x {e, l, +, +i}.
std::vector<Projector> canonical_projectors();

// Numerical rank of the operator Gram matrix (16 means informationally
// complete; the three-setting assembler tops out at 15).
int projector_rank(const std::vector<Projector>& projectors, double tol = 1e-10);

struct MleResult {
  Matrix4 rho;
  int iterations = 0;
  bool converged = false;
  double log_likelihood = 0.0;
};

// Iterative maximum likelihood: rho <- G^-1 R rho R G^-1 with
// R = sum_k (n_k / Tr(M_k rho)) M_k and G = sum_k M_k, from the maximally
// mixed start; final projection onto the PSD cone.
MleResult mle_reconstruct(const TomoCounts& counts, int max_iterations = 10000,
                          double tol = 1e-10);

// log2 of the trace norm of the partial transpose over subsystem A
double log_negativity(const Matrix4& rho);

// max over both directions of H(rho_out) - H(rho_AB), base-2
double coherent_information(const Matrix4& rho);

rates::RateMetrics entangled_rates(const Matrix4& rho, double coincidences_hz,
                                   double visibility, double mu = 0.0);

// Density matrix CSV: eight columns per row (real part row, then imaginary)
void save_density_csv(const Matrix4& rho, const std::string& path);
Matrix4 load_density_csv(const std::string& path);

// Helpers shared with tests.
Matrix4 bell_phi_plus();
// |ee><ee|/2 + |ll><ll|/2 + v (|ee><ll| + h.c.)/2 : the middle-bin fringe
// visibility of this state is exactly v
Matrix4 dephased_bell(double v);
Matrix4 partial_transpose_a(const Matrix4& rho);

}  // namespace pairsim::tomo
