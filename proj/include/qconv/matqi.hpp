#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qconv {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Dense storage guard: total composite dimension must stay at desk scale.
inline constexpr int kDimGuard = 4096;

// Relative tolerance for Hermiticity/PSD checks on construction.
inline constexpr double kHermTol = 1e-9;

// Relative eigenvalue cutoff for matrix square roots and generalized inverses.
inline constexpr double kEigCutoff = 1e-10;

struct SystemLabel {
  std::string name;
  int dim = 0;

  bool operator==(const SystemLabel& o) const { return name == o.name && dim == o.dim; }
};

using Factors = std::vector<SystemLabel>;

int total_dim(const Factors& fs);
void check_guard(std::int64_t dim);
int factor_index(const Factors& fs, const std::string& name);
bool has_factor(const Factors& fs, const std::string& name);

// Flat index of a multi-index; factors[0] is the most significant digit,
// matching kron(A, B) ordering.
int flat_index(const Factors& fs, const std::vector<int>& multi);
std::vector<int> multi_index(const Factors& fs, int flat);

Mat kron(const Mat& a, const Mat& b);
Vec kron_vec(const Vec& a, const Vec& b);

// Basis permutation matrix sending the factor order `from` to `to`
// (`to` must be a permutation of `from`).
Mat factor_permutation(const Factors& from, const std::vector<std::string>& to);

class DensityOperator {
 public:
  DensityOperator() = default;
  // Symmetrizes the input, checks PSD/trace to kHermTol (relative).
  DensityOperator(Mat m, Factors factors, bool normalized = true);

  const Mat& matrix() const { return m_; }
  const Factors& factors() const { return factors_; }
  bool normalized() const { return normalized_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double trace() const { return m_.trace().real(); }

 private:
  Mat m_;
  Factors factors_;
  bool normalized_ = true;
};

class PureState {
 public:
  PureState() = default;
  PureState(Vec v, Factors factors);

  const Vec& vector() const { return v_; }
  const Factors& factors() const { return factors_; }
  int dim() const { return static_cast<int>(v_.size()); }
  DensityOperator to_density(bool normalized = true) const;

 private:
  Vec v_;
  Factors factors_;
};

class Isometry {
 public:
  Isometry() = default;
  // matrix is d_out x d_in with V^dag V = 1 to tolerance.
  Isometry(Mat m, SystemLabel in, Factors out);

  const Mat& matrix() const { return m_; }
  const SystemLabel& in_label() const { return in_; }
  const Factors& out_labels() const { return out_; }
  int in_dim() const { return static_cast<int>(m_.cols()); }
  int out_dim() const { return static_cast<int>(m_.rows()); }

 private:
  Mat m_;
  SystemLabel in_;
  Factors out_;
};

// ---- Hermitian matrix helpers ------------------------------------------------

Mat hermitize(const Mat& m);
bool is_hermitian(const Mat& m, double tol = kHermTol);
double min_eigenvalue(const Mat& herm);
// PSD square root with relative eigenvalue cutoff.
Mat sqrt_psd(const Mat& herm);
// Generalized (support-restricted) inverse square root.
Mat inv_sqrt_psd(const Mat& herm);
Mat inv_psd(const Mat& herm);
// Projector onto the support of a PSD matrix (relative cutoff).
Mat support_projector(const Mat& herm, double rel_cutoff = kEigCutoff);
int psd_rank(const Mat& herm, double rel_cutoff = kEigCutoff);
double trace_norm(const Mat& m);

// ---- Core state operations ---------------------------------------------------

// F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1 + sqrt((1-tr rho)(1-tr sigma)).
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);
double fidelity(const Mat& rho, const Mat& sigma);
double purified_distance(const DensityOperator& rho, const DensityOperator& sigma);
double purified_distance(const Mat& rho, const Mat& sigma);
double trace_distance(const DensityOperator& rho, const DensityOperator& sigma);
double trace_distance(const Mat& rho, const Mat& sigma);

Mat partial_trace(const Mat& m, const Factors& fs, const std::vector<std::string>& keep,
                  Factors* reduced = nullptr);
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep);
DensityOperator partial_trace(const PureState& psi, const std::vector<std::string>& keep);

// Eigendecomposition-based purification; the purifying factor gets `purifier`
// as its label and dimension equal to the rank of rho.
PureState purify(const DensityOperator& rho, const std::string& purifier = "R");

// Projector onto Sym^n(C^d); rank is C(n+d-1, n).
Mat symmetric_projector(int d, int n);
std::int64_t binomial(std::int64_t n, std::int64_t k);

double generalized_inverse_lognorm(const Mat& herm);

// ---- Seeded sampling ---------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double gaussian() { return normal_(gen_); }
  cxd cgaussian() { return cxd(normal_(gen_), normal_(gen_)); }
  double uniform() { return unif_(gen_); }
  std::uint64_t integer() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

Vec haar_state(int dim, Rng& rng);
Mat haar_unitary(int dim, Rng& rng);
Mat haar_projector(int dim, int rank, Rng& rng);
// Haar mixed state of the given rank (partial trace of a pure bipartite state).
Mat haar_density(int dim, int rank, Rng& rng);

Mat maximally_entangled(int d);  // normalized Phi_d on d x d
Mat maximally_mixed(int d);

}  // namespace qconv
