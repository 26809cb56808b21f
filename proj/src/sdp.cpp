#include "qconv/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace qconv::sdp {

Term Term::sparse(int block, std::vector<std::tuple<int, int, cxd>> entries) {
  Term t;
  t.kind = Sparse;
  t.block = block;
  t.entries = std::move(entries);
  return t;
}

Term Term::rank_one(int block, Vec v, double weight) {
  Term t;
  t.kind = RankOne;
  t.block = block;
  t.vec = std::move(v);
  t.weight = weight;
  return t;
}

Term Term::identity(int block, double scale) {
  Term t;
  t.kind = IdentityScale;
  t.block = block;
  t.scale = scale;
  return t;
}

Term Term::dense_term(int block, Mat m) {
  Term t;
  t.kind = Dense;
  t.block = block;
  t.dense = std::move(m);
  return t;
}

int Problem::add_block(int dim) {
  if (dim < 1) throw std::invalid_argument("sdp: block dimension must be >= 1");
  std::int64_t total = dim;
  for (int d : block_dims_) total += d;
  check_guard(total);
  block_dims_.push_back(dim);
  return static_cast<int>(block_dims_.size()) - 1;
}

void Problem::check_term(const Term& t) const {
  if (t.block < 0 || t.block >= block_count()) throw std::invalid_argument("sdp: bad block index");
  const int d = block_dims_[t.block];
  switch (t.kind) {
    case Term::Sparse:
      for (const auto& [r, c, v] : t.entries) {
        if (r < 0 || c < 0 || r >= d || c >= d || r > c)
          throw std::invalid_argument("sdp: sparse entry out of range or not upper-triangular");
        if (r == c && std::abs(v.imag()) > 1e-14)
          throw std::invalid_argument("sdp: diagonal sparse entry must be real");
      }
      break;
    case Term::RankOne:
      if (t.vec.size() != d) throw std::invalid_argument("sdp: rank-one vector dimension mismatch");
      break;
    case Term::IdentityScale:
      break;
    case Term::Dense:
      if (t.dense.rows() != d || t.dense.cols() != d)
        throw std::invalid_argument("sdp: dense term dimension mismatch");
      if (!is_hermitian(t.dense, 1e-9)) throw std::invalid_argument("sdp: dense term not Hermitian");
      break;
  }
}

void Problem::add_objective(Term t) {
  check_term(t);
  objective_.push_back(std::move(t));
}

int Problem::add_constraint(Sense sense, double rhs) {
  constraints_.push_back(Constraint{{}, sense, rhs});
  return static_cast<int>(constraints_.size()) - 1;
}

void Problem::add_term(int constraint, Term t) {
  if (constraint < 0 || constraint >= constraint_count())
    throw std::invalid_argument("sdp: bad constraint index");
  check_term(t);
  constraints_[constraint].terms.push_back(std::move(t));
}

// ---------------------------------------------------------------------------
// Real embedding of the complex problem and the interior-point core.

namespace {

struct REntry {
  int r, c;
  double v;
};

struct RTerm {
  enum Kind { Sparse, RankK, Ident, Dense } kind = Sparse;
  int block = 0;
  std::vector<REntry> entries;   // full list, both triangles
  std::vector<RVec> vecs;        // RankK: weight * sum_l v_l v_l^T
  double weight = 1.0;
  double scale = 1.0;            // Ident
  RMat dense;
};

struct RProblem {
  std::vector<int> dims;                   // embedded block dims (2d)
  std::vector<std::vector<RTerm>> rows;    // per constraint
  std::vector<RTerm> cost;
  std::vector<double> b;
};

void embed_term(const Term& t, int cdim, double sign, std::vector<RTerm>& out) {
  const int d = cdim;
  RTerm rt;
  rt.block = t.block;
  switch (t.kind) {
    case Term::Sparse: {
      rt.kind = RTerm::Sparse;
      for (const auto& [r, c, v] : t.entries) {
        const double a = sign * v.real();
        const double bb = sign * v.imag();
        if (r == c) {
          if (a != 0.0) {
            rt.entries.push_back({r, r, a});
            rt.entries.push_back({r + d, r + d, a});
          }
        } else {
          if (a != 0.0) {
            rt.entries.push_back({r, c, a});
            rt.entries.push_back({c, r, a});
            rt.entries.push_back({r + d, c + d, a});
            rt.entries.push_back({c + d, r + d, a});
          }
          if (bb != 0.0) {
            // E = [[A, -B], [B, A]] with B[r,c] = b, B[c,r] = -b.
            rt.entries.push_back({r, c + d, -bb});
            rt.entries.push_back({c + d, r, -bb});
            rt.entries.push_back({c, r + d, bb});
            rt.entries.push_back({r + d, c, bb});
          }
        }
      }
      break;
    }
    case Term::RankOne: {
      rt.kind = RTerm::RankK;
      rt.weight = sign * t.weight;
      RVec u1(2 * d), u2(2 * d);
      for (int i = 0; i < d; ++i) {
        u1[i] = t.vec[i].real();
        u1[i + d] = t.vec[i].imag();
        u2[i] = -t.vec[i].imag();
        u2[i + d] = t.vec[i].real();
      }
      rt.vecs.push_back(std::move(u1));
      rt.vecs.push_back(std::move(u2));
      break;
    }
    case Term::IdentityScale:
      rt.kind = RTerm::Ident;
      rt.scale = sign * t.scale;
      break;
    case Term::Dense: {
      rt.kind = RTerm::Dense;
      rt.dense.resize(2 * d, 2 * d);
      RMat a = t.dense.real();
      RMat bb = t.dense.imag();
      rt.dense << a, -bb, bb, a;
      rt.dense *= sign;
      break;
    }
  }
  out.push_back(std::move(rt));
}

double term_dot(const RTerm& t, const RMat& m) {
  switch (t.kind) {
    case RTerm::Sparse: {
      double s = 0.0;
      for (const auto& e : t.entries) s += e.v * m(e.r, e.c);
      return s;
    }
    case RTerm::RankK: {
      double s = 0.0;
      for (const auto& v : t.vecs) s += v.dot(m * v);
      return t.weight * s;
    }
    case RTerm::Ident:
      return t.scale * m.trace();
    case RTerm::Dense:
      return t.dense.cwiseProduct(m).sum();
  }
  return 0.0;
}

void term_add(const RTerm& t, double y, RMat& m) {
  switch (t.kind) {
    case RTerm::Sparse:
      for (const auto& e : t.entries) m(e.r, e.c) += y * e.v;
      break;
    case RTerm::RankK:
      for (const auto& v : t.vecs) m.noalias() += (y * t.weight) * (v * v.transpose());
      break;
    case RTerm::Ident:
      m.diagonal().array() += y * t.scale;
      break;
    case RTerm::Dense:
      m.noalias() += y * t.dense;
      break;
  }
}

double term_fnorm2(const RTerm& t) {
  switch (t.kind) {
    case RTerm::Sparse: {
      double s = 0.0;
      for (const auto& e : t.entries) s += e.v * e.v;
      return s;
    }
    case RTerm::RankK: {
      // || w sum v v^T ||_F^2, vectors nearly orthogonal in the embedding.
      double s = 0.0;
      for (const auto& v : t.vecs) s += std::pow(v.squaredNorm(), 2);
      return t.weight * t.weight * s;
    }
    case RTerm::Ident:
      return t.scale * t.scale;  // times dim, close enough for scaling purposes
    case RTerm::Dense:
      return t.dense.squaredNorm();
  }
  return 0.0;
}

int env_threads() {
  if (const char* s = std::getenv("QCONV_THREADS")) {
    int v = std::atoi(s);
    if (v >= 1) return std::min(v, 32);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(std::min(hc, 8u));
}

// Deterministic parallel loop: fixed partition, disjoint writes.
template <typename F>
void parallel_rows(int n, F&& body) {
  int nt = std::min(env_threads(), n);
  if (nt <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> ts;
  ts.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    ts.emplace_back([&, t]() {
      for (int i = t; i < n; i += nt) body(i);
    });
  }
  for (auto& th : ts) th.join();
}

struct BlockState {
  RMat X, Z;
  RMat R, Rinv, W, W2;
  RVec lam;
};

struct Kernel {
  const RProblem& rp;
  std::vector<BlockState>& bs;
  // Cached W*v for every rank vector, keyed by (constraint, term, vec).
  // Flat cache: per constraint row, per term, list of vectors.
  std::vector<std::vector<std::vector<RVec>>> wv;

  explicit Kernel(const RProblem& rp_, std::vector<BlockState>& bs_) : rp(rp_), bs(bs_) {}

  void refresh_cache() {
    const int m = static_cast<int>(rp.rows.size());
    wv.assign(m, {});
    for (int i = 0; i < m; ++i) {
      wv[i].resize(rp.rows[i].size());
      for (std::size_t ti = 0; ti < rp.rows[i].size(); ++ti) {
        const RTerm& t = rp.rows[i][ti];
        if (t.kind != RTerm::RankK) continue;
        for (const auto& v : t.vecs) wv[i][ti].push_back(bs[t.block].W * v);
      }
    }
  }

  double pair(const RTerm& a, std::size_t, const std::vector<RVec>& wva, const RTerm& c,
              std::size_t, const std::vector<RVec>& wvc) const {
    const BlockState& s = bs[a.block];
    const RMat& W = s.W;
    const RMat& W2 = s.W2;
    auto sparse_sparse = [&](const RTerm& p, const RTerm& q) {
      double sum = 0.0;
      for (const auto& e1 : p.entries) {
        double inner = 0.0;
        for (const auto& e2 : q.entries) inner += e2.v * W(e1.c, e2.r) * W(e2.c, e1.r);
        sum += e1.v * inner;
      }
      return sum;
    };
    auto sparse_rank = [&](const RTerm& p, const RTerm& q, const std::vector<RVec>& wvq) {
      double sum = 0.0;
      for (std::size_t l = 0; l < q.vecs.size(); ++l) {
        const RVec& wv_ = wvq[l];
        double s2 = 0.0;
        for (const auto& e : p.entries) s2 += e.v * wv_[e.r] * wv_[e.c];
        sum += s2;
      }
      return q.weight * sum;
    };
    auto dense_of = [&](const RTerm& p) -> RMat {
      RMat d = RMat::Zero(W.rows(), W.cols());
      term_add(p, 1.0, d);
      return d;
    };
    if (a.kind == RTerm::Dense || c.kind == RTerm::Dense) {
      const RTerm& dn = (a.kind == RTerm::Dense) ? a : c;
      const RTerm& ot = (a.kind == RTerm::Dense) ? c : a;
      RMat u = W * dn.dense * W;
      return term_dot(ot, u);
    }
    if (a.kind == RTerm::Sparse && c.kind == RTerm::Sparse) return sparse_sparse(a, c);
    if (a.kind == RTerm::Sparse && c.kind == RTerm::RankK) return sparse_rank(a, c, wvc);
    if (a.kind == RTerm::RankK && c.kind == RTerm::Sparse) return sparse_rank(c, a, wva);
    if (a.kind == RTerm::RankK && c.kind == RTerm::RankK) {
      double sum = 0.0;
      for (const auto& wu : wvc)
        for (const auto& v : a.vecs) {
          double d = v.dot(wu);
          sum += d * d;
        }
      return a.weight * c.weight * sum;
    }
    if (a.kind == RTerm::Ident && c.kind == RTerm::Ident)
      return a.scale * c.scale * W2.trace();
    if (a.kind == RTerm::Ident) return a.scale * term_dot(c, W2);
    if (c.kind == RTerm::Ident) return c.scale * term_dot(a, W2);
    return term_dot(a, dense_of(c));  // unreachable fallback
  }
};

}  // namespace

Solution solve(const Problem& p, const Options& opts) {
  // ---- Convert to equality standard form with real-embedded blocks.
  RProblem rp;
  const double obj_sign = p.maximize() ? -1.0 : 1.0;
  for (int k = 0; k < p.block_count(); ++k) rp.dims.push_back(2 * p.block_dim(k));

  const int m = p.constraint_count();
  rp.rows.resize(m);
  rp.b.resize(m);
  std::vector<int> slack_block(m, -1);
  for (int i = 0; i < m; ++i) {
    const Constraint& con = p.constraint(i);
    rp.b[i] = 2.0 * con.rhs;
    for (const auto& t : con.terms) embed_term(t, p.block_dim(t.block), 1.0, rp.rows[i]);
    if (con.sense != Sense::Eq) {
      rp.dims.push_back(2);
      const int sb = static_cast<int>(rp.dims.size()) - 1;
      slack_block[i] = sb;
      RTerm st;
      st.kind = RTerm::Ident;
      st.block = sb;
      st.scale = (con.sense == Sense::Le) ? 1.0 : -1.0;
      rp.rows[i].push_back(std::move(st));
    }
  }
  for (const auto& t : p.objective()) embed_term(t, p.block_dim(t.block), obj_sign, rp.cost);

  const int nb = static_cast<int>(rp.dims.size());
  int ntot = 0;
  for (int d : rp.dims) ntot += d;

  // ---- Dense objective per block (used for residuals).
  std::vector<RMat> C(nb);
  for (int k = 0; k < nb; ++k) C[k] = RMat::Zero(rp.dims[k], rp.dims[k]);
  for (const auto& t : rp.cost) term_add(t, 1.0, C[t.block]);

  double normC = 0.0;
  for (int k = 0; k < nb; ++k) normC = std::max(normC, C[k].norm());
  double normb = 0.0;
  for (double v : rp.b) normb = std::max(normb, std::abs(v));
  double normA = 0.0;
  for (const auto& row : rp.rows)
    for (const auto& t : row) normA = std::max(normA, std::sqrt(term_fnorm2(t)));

  // ---- Initial point.
  const double xi = std::max({10.0, std::sqrt(double(ntot)), normb / (1.0 + normA)});
  const double eta = std::max({10.0, std::sqrt(double(ntot)), normC});
  std::vector<BlockState> bs(nb);
  for (int k = 0; k < nb; ++k) {
    bs[k].X = RMat::Identity(rp.dims[k], rp.dims[k]) * xi;
    bs[k].Z = RMat::Identity(rp.dims[k], rp.dims[k]) * eta;
  }
  std::vector<double> y(m, 0.0);

  Kernel kern(rp, bs);
  Solution sol;
  Eigen::VectorXd yv = Eigen::VectorXd::Zero(m);

  auto primal_value = [&]() {
    double v = 0.0;
    for (int k = 0; k < nb; ++k) v += C[k].cwiseProduct(bs[k].X).sum();
    return v;
  };
  auto dual_value = [&]() {
    double v = 0.0;
    for (int i = 0; i < m; ++i) v += rp.b[i] * yv[i];
    return v;
  };

  Eigen::MatrixXd M(m, m);
  Eigen::VectorXd rpv(m), rhs(m), dy(m);
  std::vector<RMat> Rd(nb), G(nb), dX(nb), dZ(nb), K(nb), H(nb), dXa(nb), dZa(nb);

  double best_pinf = 1e300;
  int stall_count = 0;
  int iter = 0;
  Status status = Status::MaxIter;

  for (iter = 0; iter < opts.max_iter; ++iter) {
    // ---- Scaling point per block: X = R lam R^T, Z = R^-T lam R^-1.
    bool chol_ok = true;
    for (int k = 0; k < nb; ++k) {
      BlockState& s = bs[k];
      Eigen::LLT<RMat> lx(s.X), lz(s.Z);
      if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) {
        chol_ok = false;
        break;
      }
      RMat Lx = lx.matrixL();
      RMat Lz = lz.matrixL();
      Eigen::BDCSVD<RMat> svd(Lz.transpose() * Lx, Eigen::ComputeThinU | Eigen::ComputeThinV);
      s.lam = svd.singularValues();
      RVec lam_isqrt = s.lam.cwiseSqrt().cwiseInverse();
      s.R.noalias() = Lx * svd.matrixV() * lam_isqrt.asDiagonal();
      s.Rinv.noalias() = lam_isqrt.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
      s.W.noalias() = s.R * s.R.transpose();
      s.W2.noalias() = s.W * s.W;
    }
    if (!chol_ok) break;  // cone boundary hit; report best effort below
    kern.refresh_cache();

    // ---- Residuals.
    for (int i = 0; i < m; ++i) {
      double ax = 0.0;
      for (const auto& t : rp.rows[i]) ax += term_dot(t, bs[t.block].X);
      rpv[i] = rp.b[i] - ax;
    }
    for (int k = 0; k < nb; ++k) Rd[k] = C[k] - bs[k].Z;
    for (int i = 0; i < m; ++i)
      for (const auto& t : rp.rows[i]) term_add(t, -yv[i], Rd[t.block]);

    double mu = 0.0;
    for (int k = 0; k < nb; ++k) mu += bs[k].X.cwiseProduct(bs[k].Z).sum();
    mu /= ntot;

    const double pinf = rpv.norm() / (1.0 + std::abs(normb));
    double dinf = 0.0;
    for (int k = 0; k < nb; ++k) dinf = std::max(dinf, Rd[k].norm());
    dinf /= (1.0 + normC);
    const double pv = primal_value();
    const double dv = dual_value();
    const double relgap = std::abs(pv - dv) / (1.0 + std::abs(pv) + std::abs(dv));

    if (opts.verbose)
      std::fprintf(stderr, "it %3d  mu %.3e  pinf %.3e  dinf %.3e  gap %.3e\n", iter, mu, pinf,
                   dinf, relgap);

    if (pinf <= opts.feas_tol && dinf <= opts.feas_tol && relgap <= opts.gap_tol) {
      status = Status::Optimal;
      break;
    }
    // Divergence heuristics (spec: stalled primal residual + diverging dual).
    if (dv > opts.diverge_value && pinf > opts.stall_residual) {
      status = Status::Infeasible;
      break;
    }
    if (pv < -opts.diverge_value && dinf > opts.stall_residual) {
      status = Status::Unbounded;
      break;
    }
    best_pinf = std::min(best_pinf, pinf);

    // ---- Schur complement M_ij = sum_k <A_i, W A_j W>.
    parallel_rows(m, [&](int i) {
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t ta = 0; ta < rp.rows[i].size(); ++ta)
          for (std::size_t tb = 0; tb < rp.rows[j].size(); ++tb) {
            const RTerm& A = rp.rows[i][ta];
            const RTerm& B = rp.rows[j][tb];
            if (A.block != B.block) continue;
            s += kern.pair(A, ta, kern.wv[i][ta], B, tb, kern.wv[j][tb]);
          }
        M(i, j) = s;
        M(j, i) = s;
      }
    });

    Eigen::LDLT<Eigen::MatrixXd> mf(M);
    if (mf.info() != Eigen::Success) break;

    auto solve_direction = [&](const std::vector<RMat>& Ht, std::vector<RMat>& outdX,
                               std::vector<RMat>& outdZ, Eigen::VectorXd& outdy) {
      for (int k = 0; k < nb; ++k) {
        BlockState& s = bs[k];
        const int d = rp.dims[k];
        K[k].resize(d, d);
        for (int a = 0; a < d; ++a)
          for (int b2 = 0; b2 < d; ++b2) K[k](a, b2) = 2.0 * Ht[k](a, b2) / (s.lam[a] + s.lam[b2]);
        G[k].noalias() = s.R * K[k] * s.R.transpose();
        G[k].noalias() -= s.W * Rd[k] * s.W;
      }
      for (int i = 0; i < m; ++i) {
        double ag = 0.0;
        for (const auto& t : rp.rows[i]) ag += term_dot(t, G[t.block]);
        rhs[i] = rpv[i] - ag;
      }
      outdy = mf.solve(rhs);
      for (int k = 0; k < nb; ++k) {
        outdZ[k] = Rd[k];
      }
      for (int i = 0; i < m; ++i)
        for (const auto& t : rp.rows[i]) term_add(t, -outdy[i], outdZ[t.block]);
      for (int k = 0; k < nb; ++k) {
        // dX = G + W (Rd - dZ) W  with  Rd - dZ = A^T dy.
        RMat atdy = Rd[k] - outdZ[k];
        outdX[k] = G[k] + bs[k].W * atdy * bs[k].W;
        outdX[k] = 0.5 * (outdX[k] + outdX[k].transpose()).eval();
      }
    };

    // ---- Predictor (affine scaling) direction.
    for (int k = 0; k < nb; ++k) {
      H[k] = RMat::Zero(rp.dims[k], rp.dims[k]);
      H[k].diagonal() = -bs[k].lam.array().square();
    }
    solve_direction(H, dXa, dZa, dy);

    auto max_step = [&](const std::vector<RMat>& dXt, bool primal) {
      double alpha = 1e300;
      for (int k = 0; k < nb; ++k) {
        BlockState& s = bs[k];
        RMat T;
        if (primal)
          T.noalias() = s.Rinv * dXt[k] * s.Rinv.transpose();
        else
          T.noalias() = s.R.transpose() * dXt[k] * s.R;
        RVec lam_isqrt = s.lam.cwiseSqrt().cwiseInverse();
        RMat S = lam_isqrt.asDiagonal() * T * lam_isqrt.asDiagonal();
        Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (S + S.transpose()),
                                               Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
      }
      return alpha;
    };

    double ap = max_step(dXa, true);
    double ad = max_step(dZa, false);
    ap = std::min(1.0, opts.step_fraction * ap);
    ad = std::min(1.0, opts.step_fraction * ad);

    double mu_aff = 0.0;
    for (int k = 0; k < nb; ++k)
      mu_aff += (bs[k].X + ap * dXa[k]).cwiseProduct(bs[k].Z + ad * dZa[k]).sum();
    mu_aff /= ntot;
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // ---- Corrector + centering.
    for (int k = 0; k < nb; ++k) {
      BlockState& s = bs[k];
      RMat dxh = s.Rinv * dXa[k] * s.Rinv.transpose();
      RMat dzh = s.R.transpose() * dZa[k] * s.R;
      RMat cross = 0.5 * (dxh * dzh + dzh * dxh);
      H[k] = -cross;
      H[k].diagonal().array() += sigma * mu;
      H[k].diagonal() -= s.lam.array().square().matrix();
    }
    solve_direction(H, dX, dZ, dy);

    ap = std::min(1.0, opts.step_fraction * max_step(dX, true));
    ad = std::min(1.0, opts.step_fraction * max_step(dZ, false));

    if (ap < 1e-8 && ad < 1e-8) {
      ++stall_count;
      if (stall_count >= 3) break;
    } else {
      stall_count = 0;
    }

    for (int k = 0; k < nb; ++k) {
      bs[k].X.noalias() += ap * dX[k];
      bs[k].Z.noalias() += ad * dZ[k];
      bs[k].X = 0.5 * (bs[k].X + bs[k].X.transpose());
      bs[k].Z = 0.5 * (bs[k].Z + bs[k].Z.transpose());
    }
    yv.noalias() += ad * dy;
  }

  // ---- Final classification and extraction.
  for (int i = 0; i < m; ++i) {
    double ax = 0.0;
    for (const auto& t : rp.rows[i]) ax += term_dot(t, bs[t.block].X);
    rpv[i] = rp.b[i] - ax;
  }
  for (int k = 0; k < nb; ++k) Rd[k] = C[k] - bs[k].Z;
  for (int i = 0; i < m; ++i)
    for (const auto& t : rp.rows[i]) term_add(t, -yv[i], Rd[t.block]);
  const double pinf = rpv.norm() / (1.0 + std::abs(normb));
  double dinf = 0.0;
  for (int k = 0; k < nb; ++k) dinf = std::max(dinf, Rd[k].norm());
  dinf /= (1.0 + normC);
  const double pv = primal_value();
  const double dv = dual_value();
  const double relgap = std::abs(pv - dv) / (1.0 + std::abs(pv) + std::abs(dv));

  if (status == Status::MaxIter && pinf <= 1e-7 && dinf <= 1e-7 && relgap <= 1e-6)
    status = Status::Optimal;

  sol.status = status;
  sol.iterations = iter;
  sol.primal_residual = pinf;
  sol.dual_residual = dinf;
  sol.rel_gap = relgap;
  sol.primal_value = obj_sign * pv / 2.0;
  sol.dual_value = obj_sign * dv / 2.0;
  sol.y.assign(yv.data(), yv.data() + m);
  if (p.maximize())
    for (auto& v : sol.y) v = -v;

  // Extract complex blocks, symmetrizing over the embedding structure.
  sol.blocks.resize(p.block_count());
  sol.dual_blocks.resize(p.block_count());
  for (int k = 0; k < p.block_count(); ++k) {
    const int d = p.block_dim(k);
    auto unembed = [&](const RMat& e) {
      Mat out(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          out(i, j) = cxd(0.5 * (e(i, j) + e(i + d, j + d)), 0.5 * (e(i + d, j) - e(i, j + d)));
      return hermitize(out);
    };
    sol.blocks[k] = unembed(bs[k].X);
    sol.dual_blocks[k] = unembed(bs[k].Z);
    if (p.maximize()) sol.dual_blocks[k] = -sol.dual_blocks[k];
  }
  return sol;
}

VerifyReport verify(const Problem& p, const std::vector<Mat>& blocks, double tol) {
  if (static_cast<int>(blocks.size()) != p.block_count())
    throw std::invalid_argument("verify: block count mismatch");
  for (int k = 0; k < p.block_count(); ++k)
    if (blocks[k].rows() != p.block_dim(k) || blocks[k].cols() != p.block_dim(k))
      throw std::invalid_argument("verify: block dimension mismatch");

  auto dot = [&](const Term& t) -> double {
    const Mat& x = blocks[t.block];
    switch (t.kind) {
      case Term::Sparse: {
        cxd s = 0.0;
        for (const auto& [r, c, v] : t.entries) {
          s += v * x(c, r);
          if (r != c) s += std::conj(v) * x(r, c);
        }
        return s.real();
      }
      case Term::RankOne:
        return t.weight * (t.vec.adjoint() * x * t.vec)(0, 0).real();
      case Term::IdentityScale:
        return t.scale * x.trace().real();
      case Term::Dense:
        return t.dense.cwiseProduct(x.transpose()).sum().real();
    }
    return 0.0;
  };

  VerifyReport rep;
  rep.objective = 0.0;
  for (const auto& t : p.objective()) rep.objective += dot(t);
  for (int i = 0; i < p.constraint_count(); ++i) {
    const Constraint& con = p.constraint(i);
    double ax = 0.0;
    for (const auto& t : con.terms) ax += dot(t);
    double viol = 0.0;
    switch (con.sense) {
      case Sense::Eq: viol = std::abs(ax - con.rhs); break;
      case Sense::Le: viol = std::max(0.0, ax - con.rhs); break;
      case Sense::Ge: viol = std::max(0.0, con.rhs - ax); break;
    }
    rep.constraint_residuals.push_back(viol);
    rep.max_violation = std::max(rep.max_violation, viol);
  }
  for (int k = 0; k < p.block_count(); ++k) {
    const double me = min_eigenvalue(blocks[k]);
    rep.block_min_eigs.push_back(me);
    rep.max_violation = std::max(rep.max_violation, std::max(0.0, -me));
  }
  rep.feasible = rep.max_violation <= tol;
  return rep;
}

}  // namespace qconv::sdp
