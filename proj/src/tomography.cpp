#include "pairsim/tomography.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

namespace pairsim::tomo {

namespace {

using cd = std::complex<double>;
using Vec4 = Eigen::Vector4cd;

Matrix4 rank_one(const Vec4& v) { return v * v.adjoint(); }

// detection amplitude vectors over the {ee, el, le, ll} basis for one cell
Vec4 cell_vector(int bin_a, int bin_b, double theta_a, double theta_b,
                 const StationAmplitudes& a, const StationAmplitudes& b) {
  const cd I(0.0, 1.0);
  // per-station amplitudes (component for |e>, component for |l>)
  auto station = [&](int bin, double theta, const StationAmplitudes& s) {
    Eigen::Vector2cd v = Eigen::Vector2cd::Zero();
    if (bin == 0) v(0) = s.short_amp;                      // early: e via short
    if (bin == 2) v(1) = s.long_amp;                       // late: l via long
    if (bin == 1) {                                        // middle: both paths
      v(0) = s.long_amp * std::exp(I * theta);
      v(1) = s.short_amp;
    }
    return v;
  };
  const Eigen::Vector2cd va = station(bin_a, theta_a, a);
  const Eigen::Vector2cd vb = station(bin_b, theta_b, b);
  Vec4 out;
  out << va(0) * vb(0), va(0) * vb(1), va(1) * vb(0), va(1) * vb(1);
  return out;
}

}  // namespace

std::array<std::array<Matrix4, 3>, 3> cell_operators(double theta_a,
                                                     double theta_b,
                                                     const StationAmplitudes& a,
                                                     const StationAmplitudes& b) {
  std::array<std::array<Matrix4, 3>, 3> ops;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      ops[i][j] = rank_one(cell_vector(i, j, theta_a, theta_b, a, b));
  return ops;
}

void TomoCounts::validate() const {
  if (projectors.size() != counts.size())
    throw TomoError("projector/count size mismatch");
  if (projectors.empty()) throw TomoError("empty tomography data");
  for (double c : counts)
    if (c < 0.0) throw TomoError("negative count");
}

TomoCounts assemble_counts(
    const std::array<std::array<std::uint64_t, 3>, 3>& cells_a,
    const std::array<std::array<std::uint64_t, 3>, 3>& cells_b,
    const std::array<std::array<std::uint64_t, 3>, 3>& cells_c,
    double duration_a_s, double duration_b_s, double duration_c_s,
    const PhaseSettings& phases, const StationAmplitudes& amp_a,
    const StationAmplitudes& amp_b) {
  if (duration_a_s <= 0.0 || duration_b_s <= 0.0 || duration_c_s <= 0.0)
    throw TomoError("setting durations must be positive");

  struct Setting {
    const std::array<std::array<std::uint64_t, 3>, 3>* cells;
    double duration;
    std::array<double, 2> phase;
    char name;
  };
  const Setting settings[3] = {{&cells_a, duration_a_s, phases.setting_a, 'A'},
                               {&cells_b, duration_b_s, phases.setting_b, 'B'},
                               {&cells_c, duration_c_s, phases.setting_c, 'C'}};

  // Collect (operator, rate) rows; rows with identical operators across
  // settings (timing corners, repeated 90-degree rows) merge by averaging.
  TomoCounts out;
  std::vector<int> row_hits;
  const double t_ref = duration_a_s;  // rates normalized to a common duration
  const char* bin_names = "EML";
  for (const auto& s : settings) {
    const auto ops = cell_operators(s.phase[0], s.phase[1], amp_a, amp_b);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double scaled =
            static_cast<double>((*s.cells)[i][j]) * t_ref / s.duration;
        bool merged = false;
        for (std::size_t k = 0; k < out.projectors.size(); ++k) {
          if ((out.projectors[k].op - ops[i][j]).cwiseAbs().maxCoeff() < 1e-12) {
            out.counts[k] += scaled;
            ++row_hits[k];
            out.projectors[k].label += std::string(1, '/') + s.name;
            merged = true;
            break;
          }
        }
        if (!merged) {
          Projector p;
          p.label = std::string(1, bin_names[i]) + std::string(1, bin_names[j]) +
                    ":" + s.name;
          p.op = ops[i][j];
          out.projectors.push_back(p);
          out.counts.push_back(scaled);
          row_hits.push_back(1);
        }
      }
    }
  }
  for (std::size_t k = 0; k < out.counts.size(); ++k)
    out.counts[k] /= row_hits[k];
  // 27 raw cells fold to 15 distinct operators (the timing corners repeat in
  // every setting and the 90-degree middle rows repeat across two). The
  // repeated 90-degree middle-middle measurement is kept as its own row, as
  // in the counts chart, giving the 16-element vector.
  for (std::size_t k = 0; k < out.projectors.size(); ++k) {
    if (out.projectors[k].label.rfind("MM:B", 0) == 0) {
      Projector dup = out.projectors[k];
      dup.label = "MM:B(repeat)";
      out.projectors.push_back(dup);
      out.counts.push_back(out.counts[k]);
      break;
    }
  }
  return out;
}

std::vector<Projector> canonical_projectors() {
  const cd I(0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Vector2cd e, l, plus, plusi;
  e << 1, 0;
  l << 0, 1;
  plus << s, s;
  plusi << s, I * s;
  struct Named {
    const char* n;
    Eigen::Vector2cd v;
  };
  const Named basis[4] = {{"e", e}, {"l", l}, {"+", plus}, {"+i", plusi}};
  std::vector<Projector> out;
  for (const auto& a : basis) {
    for (const auto& b : basis) {
      Vec4 v;
      v << a.v(0) * b.v(0), a.v(0) * b.v(1), a.v(1) * b.v(0), a.v(1) * b.v(1);
      out.push_back({std::string(a.n) + "x" + b.n, rank_one(v)});
    }
  }
  return out;
}

int projector_rank(const std::vector<Projector>& projectors, double tol) {
  Eigen::MatrixXcd vecs(projectors.size(), 16);
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    Eigen::Map<const Eigen::Matrix<cd, 16, 1>> flat(projectors[k].op.data());
    vecs.row(k) = flat.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vecs);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++rank;
  return rank;
}

namespace {

double log_likelihood(const TomoCounts& data, const Matrix4& rho) {
  double total_counts = 0.0, total_model = 0.0;
  for (double c : data.counts) total_counts += c;
  std::vector<double> model(data.counts.size());
  for (std::size_t k = 0; k < data.counts.size(); ++k) {
    model[k] = std::max(1e-300, (data.projectors[k].op * rho).trace().real());
    total_model += model[k];
  }
  double ll = 0.0;
  for (std::size_t k = 0; k < data.counts.size(); ++k)
    if (data.counts[k] > 0.0)
      ll += data.counts[k] * std::log(model[k] / total_model);
  (void)total_counts;
  return ll;
}

Matrix4 project_psd(const Matrix4& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix4> es(rho);
  Eigen::Vector4d ev = es.eigenvalues();
  bool dirty = false;
  for (int i = 0; i < 4; ++i) {
    if (ev(i) < 0.0) {
      ev(i) = 0.0;
      dirty = true;
    }
  }
  if (!dirty) return rho;
  Matrix4 out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  out /= out.trace().real();
  return out;
}

}  // namespace

MleResult mle_reconstruct(const TomoCounts& counts, int max_iterations,
                          double tol) {
  counts.validate();
  Matrix4 G = Matrix4::Zero();
  for (const auto& p : counts.projectors) G += p.op;
  Eigen::SelfAdjointEigenSolver<Matrix4> ges(G);
  if (ges.eigenvalues().minCoeff() <= 1e-12)
    throw TomoError("projector set does not cover the state space");
  const Matrix4 Gi = G.inverse();

  Matrix4 rho = Matrix4::Identity() / 4.0;
  MleResult res;
  double prev_ll = log_likelihood(counts, rho);
  int it = 0;
  for (; it < max_iterations; ++it) {
    Matrix4 R = Matrix4::Zero();
    for (std::size_t k = 0; k < counts.counts.size(); ++k) {
      const double m =
          std::max(1e-300, (counts.projectors[k].op * rho).trace().real());
      R += (counts.counts[k] / m) * counts.projectors[k].op;
    }
    Matrix4 next = Gi * R * rho * R * Gi;
    next = 0.5 * (next + next.adjoint().eval());
    next /= next.trace().real();

    // dilute the step if the likelihood would decrease
    double ll = log_likelihood(counts, next);
    double blend = 1.0;
    while (ll + 1e-12 < prev_ll && blend > 1e-4) {
      blend *= 0.5;
      next = (1.0 - blend) * rho + blend * next;
      next /= next.trace().real();
      ll = log_likelihood(counts, next);
    }

    const double step = (next - rho).cwiseAbs().maxCoeff();
    rho = next;
    prev_ll = ll;
    if (step < tol) {
      res.converged = true;
      ++it;
      break;
    }
  }
  // eigenvalue floor: tiny negatives from roundoff project back onto the cone
  rho = project_psd(rho);
  res.rho = rho;
  res.iterations = it;
  res.log_likelihood = prev_ll;
  return res;
}

Matrix4 partial_transpose_a(const Matrix4& rho) {
  Matrix4 out;
  for (int ia = 0; ia < 2; ++ia)
    for (int ib = 0; ib < 2; ++ib)
      for (int ja = 0; ja < 2; ++ja)
        for (int jb = 0; jb < 2; ++jb)
          out(2 * ja + ib, 2 * ia + jb) = rho(2 * ia + ib, 2 * ja + jb);
  return out;
}

double log_negativity(const Matrix4& rho) {
  const Matrix4 pt = partial_transpose_a(rho);
  Eigen::SelfAdjointEigenSolver<Matrix4> es(0.5 * (pt + pt.adjoint().eval()));
  double trace_norm = 0.0;
  for (int i = 0; i < 4; ++i) trace_norm += std::abs(es.eigenvalues()(i));
  return std::log2(trace_norm);
}

namespace {

double entropy_bits(const Eigen::VectorXd& ev) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 1e-15) h -= ev(i) * std::log2(ev(i));
  return h;
}

}  // namespace

double coherent_information(const Matrix4& rho) {
  Eigen::Matrix2cd rho_a = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd rho_b = Eigen::Matrix2cd::Zero();
  for (int ia = 0; ia < 2; ++ia)
    for (int ja = 0; ja < 2; ++ja)
      for (int k = 0; k < 2; ++k) rho_a(ia, ja) += rho(2 * ia + k, 2 * ja + k);
  for (int ib = 0; ib < 2; ++ib)
    for (int jb = 0; jb < 2; ++jb)
      for (int k = 0; k < 2; ++k) rho_b(ib, jb) += rho(2 * k + ib, 2 * k + jb);

  Eigen::SelfAdjointEigenSolver<Matrix4> es_ab(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es_a(rho_a);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es_b(rho_b);
  const double h_ab = entropy_bits(es_ab.eigenvalues());
  const double h_a = entropy_bits(es_a.eigenvalues());
  const double h_b = entropy_bits(es_b.eigenvalues());
  return std::max(h_b - h_ab, h_a - h_ab);
}

rates::RateMetrics entangled_rates(const Matrix4& rho, double coincidences_hz,
                                   double visibility, double mu) {
  rates::RateMetrics m;
  m.mu = mu;
  m.coincidences_hz = coincidences_hz;
  m.log_negativity_rate = coincidences_hz * log_negativity(rho);
  m.coherent_info_rate = coincidences_hz * std::max(0.0, coherent_information(rho));
  m.secret_key_rate = rates::secret_key_rate(coincidences_hz, visibility);
  return m;
}

void save_density_csv(const Matrix4& rho, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TomoError("cannot open " + path + " for writing");
  out.precision(17);
  out << "# density matrix: 4 rows of real parts, then 4 rows of imaginary parts\n";
  for (int pass = 0; pass < 2; ++pass) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        const double v = pass == 0 ? rho(r, c).real() : rho(r, c).imag();
        out << v << (c == 3 ? "\n" : ",");
      }
    }
  }
}

Matrix4 load_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TomoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  if (rows.size() != 8) throw TomoError("expected 8 CSV rows");
  Matrix4 rho;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      rho(r, c) = cd(rows[r][c], rows[r + 4][c]);
  return rho;
}

Matrix4 bell_phi_plus() {
  Vec4 v;
  v << 1.0 / std::sqrt(2.0), 0, 0, 1.0 / std::sqrt(2.0);
  return rank_one(v);
}

Matrix4 dephased_bell(double v) {
  Matrix4 rho = Matrix4::Zero();
  rho(0, 0) = 0.5;
  rho(3, 3) = 0.5;
  rho(0, 3) = 0.5 * v;
  rho(3, 0) = 0.5 * v;
  return rho;
}

}  // namespace pairsim::tomo
