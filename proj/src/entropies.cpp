#include "qconv/entropies.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace qconv {

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy: p outside [0,1]");
  double s = 0.0;
  if (p > 0.0) s -= p * std::log2(p);
  if (p < 1.0) s -= (1.0 - p) * std::log2(1.0 - p);
  return s;
}

double von_neumann(const Mat& rho) {
  if (std::abs(rho.trace().real() - 1.0) > 1e-6)
    throw std::invalid_argument("von_neumann: state must be normalized");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rho), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()[i];
    if (l > 1e-14) s -= l * std::log2(l);
  }
  return std::max(0.0, s);
}

double von_neumann(const DensityOperator& rho) { return von_neumann(rho.matrix()); }

double conditional_entropy(const DensityOperator& rho, const std::vector<std::string>& a,
                           const std::vector<std::string>& b) {
  std::vector<std::string> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const double sab = von_neumann(partial_trace(rho, ab));
  const double sb = b.empty() ? 0.0 : von_neumann(partial_trace(rho, b));
  return sab - sb;
}

double coherent_information(const Channel& ch, const DensityOperator& input) {
  if (input.dim() != ch.din())
    throw std::invalid_argument("coherent_information: input dimension mismatch");
  if (input.factors().size() != 1)
    throw std::invalid_argument("coherent_information: input must live on the channel input alone");
  DensityOperator in(input.matrix(), {{"Ain", ch.din()}});
  PureState phi = purify(in, "Aref");
  DensityOperator rho_ab = apply(ch, phi.to_density(), "Ain");
  const double sb = von_neumann(partial_trace(rho_ab, {"Ain"}));
  const double sab = von_neumann(rho_ab);
  return sb - sab;
}

// ---- Q^(1) optimizer --------------------------------------------------------

namespace {

Mat channel_adjoint(const Channel& ch, const Mat& m) {
  Mat out = Mat::Zero(ch.din(), ch.din());
  for (const auto& k : ch.kraus()) out.noalias() += k.adjoint() * m * k;
  return out;
}

Mat log2_clamped(const Mat& herm) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(herm));
  RVec l(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < l.size(); ++i) l[i] = std::log2(std::max(es.eigenvalues()[i], 1e-15));
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().adjoint();
}

double entropy_of(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rho), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()[i];
    if (l > 1e-14) s -= l * std::log2(l);
  }
  return s;
}

// Euclidean projection of a Hermitian matrix onto the density-matrix set.
Mat project_density(const Mat& herm) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(herm));
  RVec l = es.eigenvalues();
  // Project the spectrum onto the probability simplex.
  const int n = static_cast<int>(l.size());
  std::vector<double> v(l.data(), l.data() + n);
  std::sort(v.begin(), v.end(), std::greater<double>());
  double csum = 0.0, theta = 0.0;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    csum += v[i];
    const double t = (csum - 1.0) / (i + 1);
    if (v[i] - t > 0) {
      theta = t;
      k = i + 1;
    }
  }
  (void)k;
  RVec pl(n);
  for (int i = 0; i < n; ++i) pl[i] = std::max(0.0, l[i] - theta);
  return es.eigenvectors() * pl.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Q1Result q1(const Channel& ch, const Q1Options& opts) {
  const Channel comp = complementary(ch);
  auto objective = [&](const Mat& rho) {
    return entropy_of(ch.apply_matrix(rho)) - entropy_of(comp.apply_matrix(rho));
  };
  auto gradient = [&](const Mat& rho) {
    Mat g = -channel_adjoint(ch, log2_clamped(ch.apply_matrix(rho))) +
            channel_adjoint(comp, log2_clamped(comp.apply_matrix(rho)));
    return hermitize(g);
  };

  Rng rng(opts.seed);
  const int d = ch.din();
  Q1Result best;
  best.value = -1e300;

  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Mat rho = (r == 0) ? maximally_mixed(d) : haar_density(d, d, rng);
    double f = objective(rho);
    int it = 0;
    bool converged = false;
    double step = 0.5;
    for (; it < opts.max_iter; ++it) {
      Mat g = gradient(rho);
      Mat cand;
      double fc = -1e300;
      // Backtracking on the projected step.
      bool improved = false;
      for (int bt = 0; bt < 40; ++bt) {
        cand = project_density(rho + step * g);
        fc = objective(cand);
        if (fc >= f - 1e-14) {
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
      const double delta = fc - f;
      const double move = (cand - rho).norm();
      rho = cand;
      f = fc;
      step = std::min(step * 1.6, 4.0);
      if (delta <= opts.tol && move <= 1e-8) {
        converged = true;
        break;
      }
    }
    if (f > best.value) {
      best.value = f;
      best.optimizer = rho;
      best.iterations = it;
      best.converged = converged;
    }
  }

  // Qubit fallback: fine grid over diagonal input spectra.
  if (d == 2) {
    double gv = -1e300;
    for (double p = 0.0; p <= 1.0 + 1e-12; p += opts.grid_step) {
      Mat rho = Mat::Zero(2, 2);
      rho(0, 0) = std::min(1.0, p);
      rho(1, 1) = 1.0 - rho(0, 0).real();
      gv = std::max(gv, objective(rho));
    }
    best.grid_value = gv;
    if (gv > best.value) {
      best.value = gv;  // grid found a better point; optimizer stays informative
    }
  }
  return best;
}

// ---- Smooth / exact conditional min- and max-entropy SDPs --------------------

EntropyQuery::EntropyQuery(DensityOperator s, std::vector<std::string> a,
                           std::vector<std::string> b, double e)
    : state(std::move(s)), target(std::move(a)), conditioning(std::move(b)), eps(e) {
  if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("entropy query: eps must lie in [0,1)");
  for (const auto& t : target) {
    factor_index(state.factors(), t);
    if (std::find(conditioning.begin(), conditioning.end(), t) != conditioning.end())
      throw std::invalid_argument("entropy query: target and conditioning labels overlap");
  }
  for (const auto& c : conditioning) factor_index(state.factors(), c);
  if (target.empty()) throw std::invalid_argument("entropy query: empty target");
}

EntropyQuery::EntropyQuery(const PureState& s, std::vector<std::string> a,
                           std::vector<std::string> b, double e)
    : EntropyQuery(s.to_density(), std::move(a), std::move(b), e) {}

namespace {

// Reduce to target+conditioning in that order and purify with label "_R".
PureState reduced_purification(const EntropyQuery& q) {
  std::vector<std::string> keep = q.target;
  keep.insert(keep.end(), q.conditioning.begin(), q.conditioning.end());
  DensityOperator red = partial_trace(q.state, keep);
  // Reorder to target-then-conditioning.
  Mat perm = factor_permutation(red.factors(), keep);
  Factors ordered;
  for (const auto& n : keep) ordered.push_back(red.factors()[factor_index(red.factors(), n)]);
  DensityOperator ord(perm * red.matrix() * perm.adjoint(), ordered, red.normalized());
  return purify(ord, "_R");
}

int group_dim(const Factors& fs, std::size_t from, std::size_t count) {
  int d = 1;
  for (std::size_t i = from; i < from + count; ++i) d *= fs[i].dim;
  return d;
}

// Exact H_min(X|Z) of a density matrix on X (x) Z: -log2 min Tr sigma
// s.t. rho <= 1 (x) sigma.
double hmin_exact_of(const Mat& rho, int dx, int dz) {
  sdp::Problem p;
  const int sig = p.add_block(dz);
  const int slk = p.add_block(dx * dz);
  p.add_objective(sdp::Term::identity(sig, 1.0));
  const int dxz = dx * dz;
  for (int a = 0; a < dxz; ++a)
    for (int b = a; b < dxz; ++b) {
      const int xa = a / dz, za = a % dz;
      const int xb = b / dz, zb = b % dz;
      for (int reim = 0; reim < (a == b ? 1 : 2); ++reim) {
        const cxd unit = reim == 0 ? cxd(1, 0) : cxd(0, 1);
        const double rhs = (a == b) ? rho(a, b).real()
                                    : (reim == 0 ? 2.0 * rho(a, b).real() : 2.0 * rho(a, b).imag());
        const int ci = p.add_constraint(sdp::Sense::Eq, rhs);
        p.add_term(ci, sdp::Term::sparse(slk, {{a, b, -unit}}));
        if (xa == xb) p.add_term(ci, sdp::Term::sparse(sig, {{za, zb, unit}}));
      }
    }
  auto sol = sdp::solve(p);
  if (sol.status != sdp::Status::Optimal)
    throw std::runtime_error("hmin: SDP did not reach optimality");
  return -std::log2(std::max(sol.primal_value, 1e-300));
}

}  // namespace

double hmin(const EntropyQuery& q) {
  if (q.eps != 0.0) throw std::invalid_argument("hmin: eps must be 0 (use hmin_smooth)");
  std::vector<std::string> keep = q.target;
  keep.insert(keep.end(), q.conditioning.begin(), q.conditioning.end());
  DensityOperator red = partial_trace(q.state, keep);
  Mat perm = factor_permutation(red.factors(), keep);
  Mat rho = perm * red.matrix() * perm.adjoint();
  int dx = 1, dz = 1;
  for (const auto& t : q.target) dx *= red.factors()[factor_index(red.factors(), t)].dim;
  for (const auto& c : q.conditioning) dz *= red.factors()[factor_index(red.factors(), c)].dim;
  return hmin_exact_of(rho, dx, dz);
}

double hmax(const EntropyQuery& q) {
  if (q.eps != 0.0) throw std::invalid_argument("hmax: eps must be 0 (use hmax_smooth)");
  PureState psi = reduced_purification(q);
  // H_max(T|C) = -H_min(T|R) on the purification.
  const Factors& fs = psi.factors();
  const std::size_t nt = q.target.size(), nc = q.conditioning.size();
  const int dx = group_dim(fs, 0, nt);
  const int dz_cond = group_dim(fs, nt, nc);
  const int dr = fs.back().dim;
  // Reorder [T, C, R] -> [T, R, C] and trace out C.
  std::vector<std::string> order;
  for (std::size_t i = 0; i < nt; ++i) order.push_back(fs[i].name);
  order.push_back("_R");
  for (std::size_t i = nt; i < nt + nc; ++i) order.push_back(fs[i].name);
  Mat perm = factor_permutation(fs, order);
  Vec v = perm * psi.vector();
  Mat full = v * v.adjoint();
  Factors ordered;
  for (const auto& n : order) ordered.push_back(fs[factor_index(fs, n)]);
  std::vector<std::string> keep;
  for (std::size_t i = 0; i + 1 < order.size() - nc + 1; ++i) keep.push_back(order[i]);
  // keep = targets + _R
  Mat rho_tr = partial_trace(full, ordered, keep);
  (void)dz_cond;
  return -hmin_exact_of(rho_tr, dx, dr);
}

namespace {

struct SmoothBuild {
  sdp::Problem prob;
  int rho_block = 0, s_block = 0, sigma_block = 0;
  int fid_ci = 0, tr_ci = 0;
  int first_link_ci = 0;
  int dx = 0, dz = 0, dy = 0;
};

// Primal smooth min-entropy SDP for H^eps_min(X|Z) on a pure psi ordered
// [X..., Z..., Y...]:
//   min Tr sigma  s.t.  rho' >= 0, Tr rho' <= 1, <psi, rho'> >= 1 - eps^2,
//                       Tr_Y rho' <= 1_X (x) sigma_Z.
SmoothBuild build_smooth(const Vec& psi, int dx, int dz, int dy, double eps) {
  SmoothBuild b;
  b.dx = dx;
  b.dz = dz;
  b.dy = dy;
  b.rho_block = b.prob.add_block(dx * dz * dy);
  b.s_block = b.prob.add_block(dx * dz);
  b.sigma_block = b.prob.add_block(dz);
  b.prob.add_objective(sdp::Term::identity(b.sigma_block, 1.0));

  const int dxz = dx * dz;
  b.first_link_ci = b.prob.constraint_count();
  for (int a = 0; a < dxz; ++a)
    for (int c = a; c < dxz; ++c) {
      const int xa = a / dz, za = a % dz;
      const int xc = c / dz, zc = c % dz;
      for (int reim = 0; reim < (a == c ? 1 : 2); ++reim) {
        const cxd unit = reim == 0 ? cxd(1, 0) : cxd(0, 1);
        const int ci = b.prob.add_constraint(sdp::Sense::Eq, 0.0);
        std::vector<std::tuple<int, int, cxd>> re;
        re.reserve(dy);
        for (int y = 0; y < dy; ++y) re.push_back({a * dy + y, c * dy + y, unit});
        b.prob.add_term(ci, sdp::Term::sparse(b.rho_block, std::move(re)));
        b.prob.add_term(ci, sdp::Term::sparse(b.s_block, {{a, c, unit}}));
        if (xa == xc) b.prob.add_term(ci, sdp::Term::sparse(b.sigma_block, {{za, zc, -unit}}));
      }
    }
  b.tr_ci = b.prob.add_constraint(sdp::Sense::Le, 1.0);
  b.prob.add_term(b.tr_ci, sdp::Term::identity(b.rho_block, 1.0));
  b.fid_ci = b.prob.add_constraint(sdp::Sense::Ge, 1.0 - eps * eps);
  b.prob.add_term(b.fid_ci, sdp::Term::rank_one(b.rho_block, psi, 1.0));
  return b;
}

SmoothEntropyResult solve_smooth(const Vec& psi, int dx, int dz, int dy, double eps,
                                 const sdp::Options& so) {
  SmoothBuild b = build_smooth(psi, dx, dz, dy, eps);
  auto sol = sdp::solve(b.prob, so);
  SmoothEntropyResult r;
  r.status = sol.status;
  r.rel_gap = sol.rel_gap;
  r.iterations = sol.iterations;
  if (sol.status != sdp::Status::Optimal)
    throw std::runtime_error("smooth entropy SDP did not reach optimality");
  r.exponent = sol.primal_value;
  r.value = -std::log2(std::max(r.exponent, 1e-300));
  r.dual_r = std::max(0.0, sol.y[b.fid_ci]);
  r.dual_s = std::max(0.0, -sol.y[b.tr_ci]);
  r.dual_x = sol.dual_blocks[b.s_block];
  return r;
}

}  // namespace

SmoothEntropyResult hmin_smooth_full(const EntropyQuery& q, const sdp::Options& so) {
  PureState psi = reduced_purification(q);
  const Factors& fs = psi.factors();
  const std::size_t nt = q.target.size(), nc = q.conditioning.size();
  const int dx = group_dim(fs, 0, nt);
  const int dz = group_dim(fs, nt, nc);
  const int dy = fs.back().dim;
  return solve_smooth(psi.vector(), dx, dz, dy, q.eps, so);
}

double hmin_smooth(const EntropyQuery& q) { return hmin_smooth_full(q).value; }

SmoothEntropyResult hmax_smooth_full(const EntropyQuery& q, const sdp::Options& so) {
  PureState psi = reduced_purification(q);
  const Factors& fs = psi.factors();
  const std::size_t nt = q.target.size(), nc = q.conditioning.size();
  const int dx = group_dim(fs, 0, nt);
  const int dz = fs.back().dim;  // conditioner becomes the purifier
  const int dy = group_dim(fs, nt, nc);
  // Reorder [T, C, R] -> [T, R, C].
  std::vector<std::string> order;
  for (std::size_t i = 0; i < nt; ++i) order.push_back(fs[i].name);
  order.push_back("_R");
  for (std::size_t i = nt; i < nt + nc; ++i) order.push_back(fs[i].name);
  Vec v = factor_permutation(fs, order) * psi.vector();
  SmoothEntropyResult r = solve_smooth(v, dx, dz, dy, q.eps, so);
  r.value = -r.value;  // H^eps_max(T|C) = -H^eps_min(T|R)
  return r;
}

double hmax_smooth(const EntropyQuery& q) { return hmax_smooth_full(q).value; }

DualCheck hmin_smooth_dual_value(const PureState& psi, const std::vector<std::string>& target,
                                 const std::vector<std::string>& cond, double delta, double r,
                                 double s, const Mat& x, double tol) {
  // Reorder psi to [target, cond, rest].
  std::vector<std::string> order = target;
  order.insert(order.end(), cond.begin(), cond.end());
  for (const auto& f : psi.factors())
    if (std::find(order.begin(), order.end(), f.name) == order.end()) order.push_back(f.name);
  Mat perm = factor_permutation(psi.factors(), order);
  Vec v = perm * psi.vector();
  int dx = 1, dz = 1;
  for (const auto& t : target) dx *= psi.factors()[factor_index(psi.factors(), t)].dim;
  for (const auto& c : cond) dz *= psi.factors()[factor_index(psi.factors(), c)].dim;
  const int dy = static_cast<int>(v.size()) / (dx * dz);
  if (x.rows() != static_cast<Eigen::Index>(dx) * dz)
    throw std::invalid_argument("dual candidate X has wrong shape");

  DualCheck out;
  Mat op = kron(x, Mat::Identity(dy, dy));
  op += s * Mat::Identity(op.rows(), op.cols());
  op -= r * (v * v.adjoint());
  out.min_eig_operator = min_eigenvalue(op);
  out.min_eig_x = min_eigenvalue(x);
  Factors xz{{"x", dx}, {"z", dz}};
  Mat trx = partial_trace(x, xz, {"z"});
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(trx - Mat::Identity(dz, dz)),
                                        Eigen::EigenvaluesOnly);
  out.trace_violation = std::max(0.0, es.eigenvalues().maxCoeff());
  out.feasible = r >= -tol && s >= -tol && out.min_eig_x >= -tol && out.min_eig_operator >= -tol &&
                 out.trace_violation <= tol;
  out.value = delta * r - s;
  return out;
}

double aep_bound(const AepParams& p, double cond_entropy, AepSide side) {
  if (p.eps <= 0.0 || p.eps >= 1.0) throw std::invalid_argument("aep_bound: eps must lie in (0,1)");
  if (p.n < 1) throw std::invalid_argument("aep_bound: n must be >= 1");
  if (p.mu_b < 0.0 || p.mu_c < 0.0) throw std::invalid_argument("aep_bound: mu must be >= 0");
  const double corr = (p.mu_b + p.mu_c) * std::sqrt(p.n * std::log(2.0 / p.eps));
  return side == AepSide::MinLower ? p.n * cond_entropy - corr : p.n * cond_entropy + corr;
}

Mat typical_projector(const Mat& rho, int n, double delta, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("typical_projector: sign must be +-1");
  if (n < 1) throw std::invalid_argument("typical_projector: n must be >= 1");
  const int d = static_cast<int>(rho.rows());
  std::int64_t dim = 1;
  for (int i = 0; i < n; ++i) {
    dim *= d;
    check_guard(dim);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rho));
  const RVec lam = es.eigenvalues();
  const double top = std::max(lam.maxCoeff(), 1e-300);
  std::vector<double> nlog(d);
  std::vector<bool> supp(d);
  double entropy = 0.0;
  for (int i = 0; i < d; ++i) {
    supp[i] = lam[i] > kEigCutoff * top;
    nlog[i] = supp[i] ? -std::log2(lam[i]) : 0.0;
    if (supp[i]) entropy += lam[i] * nlog[i];
  }
  const double bound = sign > 0 ? n * entropy + delta * std::sqrt(double(n))
                                : n * entropy - delta * std::sqrt(double(n));

  // Select strings in the eigenbasis.
  const int D = static_cast<int>(dim);
  RVec sel = RVec::Zero(D);
  double weight = 0.0;
  for (int s = 0; s < D; ++s) {
    int t = s;
    double sum = 0.0;
    double prob = 1.0;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      const int x = t % d;
      t /= d;
      if (!supp[x]) {
        ok = false;
        break;
      }
      sum += nlog[x];
      prob *= lam[x];
    }
    if (!ok) continue;
    const bool in = sign > 0 ? (sum <= bound + 1e-12) : (sum >= bound - 1e-12);
    if (in) {
      sel[s] = 1.0;
      weight += prob;
    }
  }
  // Hoeffding weight bound, checked per call.
  const double mu = generalized_inverse_lognorm(rho);
  if (mu > 0.0) {
    const double hoeffding = 1.0 - std::exp(-2.0 * delta * delta / (mu * mu));
    if (weight < hoeffding - 1e-9)
      throw std::logic_error("typical_projector: weight fell below the Hoeffding bound");
  }
  Mat vn = Mat::Identity(1, 1);
  for (int i = 0; i < n; ++i) vn = kron(vn, es.eigenvectors());
  return vn * sel.asDiagonal() * vn.adjoint();
}

PureState half_erasure_state(int d) {
  const int de = d + 1;
  Factors fs{{"A", d}, {"E", de}, {"Ep", de}};
  Vec v = Vec::Zero(total_dim(fs));
  const double w = 1.0 / std::sqrt(2.0 * d);
  for (int a = 0; a < d; ++a) {
    v[(static_cast<Eigen::Index>(a) * de + a) * de + d] += w;  // Phi^{AE} |*>^{E'}
    v[(static_cast<Eigen::Index>(a) * de + d) * de + a] += w;  // Phi^{AE'} |*>^{E}
  }
  return PureState(std::move(v), fs);
}

}  // namespace qconv
