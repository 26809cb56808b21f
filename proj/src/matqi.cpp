#include "qconv/matqi.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace qconv {

int total_dim(const Factors& fs) {
  std::int64_t d = 1;
  for (const auto& f : fs) {
    if (f.dim < 1) throw std::invalid_argument("factor dimension must be >= 1: " + f.name);
    d *= f.dim;
    check_guard(d);
  }
  return static_cast<int>(d);
}

void check_guard(std::int64_t dim) {
  if (dim > kDimGuard)
    throw std::invalid_argument("total dimension " + std::to_string(dim) +
                                " exceeds dense-storage guard " + std::to_string(kDimGuard));
}

int factor_index(const Factors& fs, const std::string& name) {
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fs[i].name == name) return static_cast<int>(i);
  throw std::invalid_argument("unknown factor label: " + name);
}

bool has_factor(const Factors& fs, const std::string& name) {
  for (const auto& f : fs)
    if (f.name == name) return true;
  return false;
}

static void check_unique_names(const Factors& fs) {
  std::set<std::string> seen;
  for (const auto& f : fs)
    if (!seen.insert(f.name).second)
      throw std::invalid_argument("duplicate factor label: " + f.name);
}

int flat_index(const Factors& fs, const std::vector<int>& multi) {
  if (multi.size() != fs.size()) throw std::invalid_argument("multi-index arity mismatch");
  int idx = 0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (multi[i] < 0 || multi[i] >= fs[i].dim) throw std::out_of_range("multi-index out of range");
    idx = idx * fs[i].dim + multi[i];
  }
  return idx;
}

std::vector<int> multi_index(const Factors& fs, int flat) {
  std::vector<int> multi(fs.size());
  for (int i = static_cast<int>(fs.size()) - 1; i >= 0; --i) {
    multi[i] = flat % fs[i].dim;
    flat /= fs[i].dim;
  }
  return multi;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vec kron_vec(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Mat factor_permutation(const Factors& from, const std::vector<std::string>& to) {
  if (to.size() != from.size()) throw std::invalid_argument("permutation arity mismatch");
  const int d = total_dim(from);
  std::vector<int> perm(to.size());
  for (std::size_t i = 0; i < to.size(); ++i) perm[i] = factor_index(from, to[i]);
  Factors tofs(from.size());
  for (std::size_t i = 0; i < to.size(); ++i) tofs[i] = from[perm[i]];
  Mat p = Mat::Zero(d, d);
  for (int x = 0; x < d; ++x) {
    auto mi = multi_index(from, x);
    std::vector<int> mo(mi.size());
    for (std::size_t i = 0; i < perm.size(); ++i) mo[i] = mi[perm[i]];
    p(flat_index(tofs, mo), x) = 1.0;
  }
  return p;
}

DensityOperator::DensityOperator(Mat m, Factors factors, bool normalized)
    : m_(std::move(m)), factors_(std::move(factors)), normalized_(normalized) {
  check_unique_names(factors_);
  const int d = total_dim(factors_);
  if (m_.rows() != d || m_.cols() != d)
    throw std::invalid_argument("density matrix dimension does not match factors");
  const double scale = std::max(1e-300, m_.cwiseAbs().maxCoeff());
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > 1e-6 * scale)
    throw std::invalid_argument("density operator is not Hermitian within tolerance");
  m_ = hermitize(m_);
  const double norm = m_.norm();
  const double tol = kHermTol * std::max(1.0, norm);
  if (min_eigenvalue(m_) < -1e3 * tol)
    throw std::invalid_argument("density operator has a negative eigenvalue beyond tolerance");
  const double tr = m_.trace().real();
  if (tr > 1.0 + 1e-6) throw std::invalid_argument("density operator trace exceeds 1");
  if (normalized_ && std::abs(tr - 1.0) > 1e-6)
    throw std::invalid_argument("state marked normalized but trace != 1");
}

PureState::PureState(Vec v, Factors factors) : v_(std::move(v)), factors_(std::move(factors)) {
  check_unique_names(factors_);
  const int d = total_dim(factors_);
  if (v_.size() != d) throw std::invalid_argument("state vector dimension does not match factors");
  if (std::abs(v_.norm() - 1.0) > 1e-6) throw std::invalid_argument("state vector is not normalized");
}

DensityOperator PureState::to_density(bool normalized) const {
  return DensityOperator(v_ * v_.adjoint(), factors_, normalized);
}

Isometry::Isometry(Mat m, SystemLabel in, Factors out)
    : m_(std::move(m)), in_(std::move(in)), out_(std::move(out)) {
  if (m_.cols() != in_.dim) throw std::invalid_argument("isometry input dimension mismatch");
  if (m_.rows() != total_dim(out_)) throw std::invalid_argument("isometry output dimension mismatch");
  if (m_.rows() < m_.cols()) throw std::invalid_argument("isometry must not shrink the space");
  Mat g = m_.adjoint() * m_;
  if ((g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > 1e-7)
    throw std::invalid_argument("isometry fails V^dag V = 1");
}

Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

bool is_hermitian(const Mat& m, double tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_eigenvalue(const Mat& herm) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(herm), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

static Mat eig_apply(const Mat& herm, const std::function<double(double, double)>& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(herm));
  const RVec ev = es.eigenvalues();
  const double top = std::max(0.0, ev.cwiseAbs().maxCoeff());
  RVec mapped(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) mapped[i] = f(ev[i], top);
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().adjoint();
}

Mat sqrt_psd(const Mat& herm) {
  return eig_apply(herm, [](double x, double top) {
    return x > kEigCutoff * std::max(top, 1e-300) ? std::sqrt(x) : 0.0;
  });
}

Mat inv_sqrt_psd(const Mat& herm) {
  return eig_apply(herm, [](double x, double top) {
    return x > kEigCutoff * std::max(top, 1e-300) ? 1.0 / std::sqrt(x) : 0.0;
  });
}

Mat inv_psd(const Mat& herm) {
  return eig_apply(herm, [](double x, double top) {
    return x > kEigCutoff * std::max(top, 1e-300) ? 1.0 / x : 0.0;
  });
}

Mat support_projector(const Mat& herm, double rel_cutoff) {
  return eig_apply(herm, [rel_cutoff](double x, double top) {
    return x > rel_cutoff * std::max(top, 1e-300) ? 1.0 : 0.0;
  });
}

int psd_rank(const Mat& herm, double rel_cutoff) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(herm), Eigen::EigenvaluesOnly);
  const RVec ev = es.eigenvalues();
  const double top = std::max(0.0, ev.cwiseAbs().maxCoeff());
  int r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > rel_cutoff * std::max(top, 1e-300)) ++r;
  return r;
}

double trace_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

static void check_same_factors(const Factors& a, const Factors& b) {
  if (a.size() != b.size()) throw std::invalid_argument("factor spaces differ");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) throw std::invalid_argument("factor spaces differ at " + a[i].name);
}

double fidelity(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw std::invalid_argument("fidelity: dimension mismatch");
  const double tr = rho.trace().real();
  const double ts = sigma.trace().real();
  const double root = trace_norm(sqrt_psd(rho) * sqrt_psd(sigma));
  const double extra = std::sqrt(std::max(0.0, 1.0 - tr) * std::max(0.0, 1.0 - ts));
  return std::min(1.0, root + extra);
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_factors(rho.factors(), sigma.factors());
  return fidelity(rho.matrix(), sigma.matrix());
}

double purified_distance(const Mat& rho, const Mat& sigma) {
  const double f = fidelity(rho, sigma);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double purified_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_factors(rho.factors(), sigma.factors());
  return purified_distance(rho.matrix(), sigma.matrix());
}

double trace_distance(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw std::invalid_argument("trace_distance: dimension mismatch");
  return 0.5 * trace_norm(rho - sigma);
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_factors(rho.factors(), sigma.factors());
  return trace_distance(rho.matrix(), sigma.matrix());
}

Mat partial_trace(const Mat& m, const Factors& fs, const std::vector<std::string>& keep,
                  Factors* reduced) {
  // Validate and split the factor list into kept and traced parts.
  for (const auto& name : keep) factor_index(fs, name);
  std::vector<int> kept_pos, traced_pos;
  Factors kept_fs, traced_fs;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    bool k = std::find(keep.begin(), keep.end(), fs[i].name) != keep.end();
    if (k) {
      kept_pos.push_back(static_cast<int>(i));
      kept_fs.push_back(fs[i]);
    } else {
      traced_pos.push_back(static_cast<int>(i));
      traced_fs.push_back(fs[i]);
    }
  }
  const int dk = kept_fs.empty() ? 1 : total_dim(kept_fs);
  const int dt = traced_fs.empty() ? 1 : total_dim(traced_fs);
  const int d = static_cast<int>(m.rows());
  if (d != dk * dt) throw std::invalid_argument("partial_trace: matrix/factor mismatch");

  // Map (kept flat, traced flat) -> original flat index.
  std::vector<int> orig(dk * static_cast<std::int64_t>(dt));
  for (int x = 0; x < d; ++x) {
    auto mi = multi_index(fs, x);
    int ik = 0, it = 0;
    for (std::size_t i = 0; i < kept_pos.size(); ++i) ik = ik * fs[kept_pos[i]].dim + mi[kept_pos[i]];
    for (std::size_t i = 0; i < traced_pos.size(); ++i)
      it = it * fs[traced_pos[i]].dim + mi[traced_pos[i]];
    orig[static_cast<std::int64_t>(ik) * dt + it] = x;
  }
  Mat out = Mat::Zero(dk, dk);
  for (int a = 0; a < dk; ++a)
    for (int b = 0; b < dk; ++b) {
      cxd s = 0.0;
      for (int t = 0; t < dt; ++t)
        s += m(orig[static_cast<std::int64_t>(a) * dt + t], orig[static_cast<std::int64_t>(b) * dt + t]);
      out(a, b) = s;
    }
  if (reduced) *reduced = kept_fs;
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep) {
  Factors red;
  Mat m = partial_trace(rho.matrix(), rho.factors(), keep, &red);
  return DensityOperator(std::move(m), std::move(red), rho.normalized());
}

DensityOperator partial_trace(const PureState& psi, const std::vector<std::string>& keep) {
  return partial_trace(psi.to_density(), keep);
}

PureState purify(const DensityOperator& rho, const std::string& purifier) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix());
  const RVec ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 1e-300);
  std::vector<int> kept;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > kEigCutoff * top) kept.push_back(static_cast<int>(i));
  if (kept.empty()) throw std::invalid_argument("cannot purify the zero operator");
  const int r = static_cast<int>(kept.size());
  const int d = rho.dim();
  Vec psi = Vec::Zero(static_cast<Eigen::Index>(d) * r);
  for (int k = 0; k < r; ++k) {
    const double w = std::sqrt(ev[kept[k]]);
    for (int i = 0; i < d; ++i) psi[static_cast<Eigen::Index>(i) * r + k] = w * es.eigenvectors()(i, kept[k]);
  }
  // Subnormalized inputs purify to subnormalized vectors; renormalize and record.
  const double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-6 && rho.normalized())
    throw std::runtime_error("purification lost normalization");
  psi /= n;
  Factors fs = rho.factors();
  fs.push_back({purifier, r});
  return PureState(std::move(psi), std::move(fs));
}

std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Mat symmetric_projector(int d, int n) {
  if (d < 1 || n < 1) throw std::invalid_argument("symmetric_projector: d, n must be >= 1");
  std::int64_t dim = 1;
  for (int i = 0; i < n; ++i) {
    dim *= d;
    check_guard(dim);
  }
  const int D = static_cast<int>(dim);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Mat p = Mat::Zero(D, D);
  std::int64_t count = 0;
  do {
    // Permutation operator: |x_1..x_n> -> |x_{perm(1)}..x_{perm(n)}>.
    for (int x = 0; x < D; ++x) {
      int digits[16];
      int t = x;
      for (int i = n - 1; i >= 0; --i) {
        digits[i] = t % d;
        t /= d;
      }
      int y = 0;
      for (int i = 0; i < n; ++i) y = y * d + digits[perm[i]];
      p(y, x) += 1.0;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return p / static_cast<double>(count);
}

double generalized_inverse_lognorm(const Mat& herm) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(herm), Eigen::EigenvaluesOnly);
  const RVec ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (top <= 0.0) throw std::invalid_argument("generalized_inverse_lognorm: zero operator");
  double smallest = top;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > kEigCutoff * top) smallest = std::min(smallest, ev[i]);
  return -std::log2(smallest);
}

Vec haar_state(int dim, Rng& rng) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.cgaussian();
  return v / v.norm();
}

Mat haar_unitary(int dim, Rng& rng) {
  Mat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.cgaussian();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    cxd rii = r(i, i);
    q.col(i) *= (std::abs(rii) > 0) ? rii / std::abs(rii) : 1.0;
  }
  return q;
}

Mat haar_projector(int dim, int rank, Rng& rng) {
  if (rank > dim) throw std::invalid_argument("haar_projector: rank > dim");
  if (rank < 1) throw std::invalid_argument("haar_projector: rank must be >= 1");
  Mat u = haar_unitary(dim, rng);
  Mat cols = u.leftCols(rank);
  return cols * cols.adjoint();
}

Mat haar_density(int dim, int rank, Rng& rng) {
  if (rank < 1 || rank > kDimGuard / dim) throw std::invalid_argument("haar_density: bad rank");
  Vec psi(static_cast<Eigen::Index>(dim) * rank);
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = rng.cgaussian();
  psi /= psi.norm();
  Factors fs{{"S", dim}, {"R", rank}};
  return partial_trace(Mat(psi * psi.adjoint()), fs, {"S"});
}

Mat maximally_entangled(int d) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i) v[static_cast<Eigen::Index>(i) * d + i] = 1.0 / std::sqrt(double(d));
  return v * v.adjoint();
}

Mat maximally_mixed(int d) { return Mat::Identity(d, d) / double(d); }

}  // namespace qconv
