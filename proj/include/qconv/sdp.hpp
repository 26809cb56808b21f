#pragma once

#include "qconv/matqi.hpp"

#include <tuple>
#include <vector>

namespace qconv::sdp {

// Dense primal-dual interior-point solver for small SDPs over complex
// Hermitian blocks. Internally each complex block of dimension d is embedded
// as a real symmetric block of dimension 2d, which keeps the core in real
// arithmetic. Constraints carry structure tags (sparse / rank-one / identity /
// dense) so the Schur complement can be assembled without touching full
// matrices where possible.

enum class Sense { Eq, Le, Ge };
enum class Status { Optimal, Infeasible, Unbounded, MaxIter };

struct Term {
  enum Kind { Sparse, RankOne, IdentityScale, Dense } kind = Sparse;
  int block = 0;
  // Sparse: upper-triangle entries (r <= c, value); the (c, r) entry is the
  // conjugate. Diagonal values must be real.
  std::vector<std::tuple<int, int, cxd>> entries;
  // RankOne: weight * v v^dag.
  Vec vec;
  double weight = 1.0;
  // IdentityScale: scale * I.
  double scale = 1.0;
  // Dense Hermitian matrix.
  Mat dense;

  static Term sparse(int block, std::vector<std::tuple<int, int, cxd>> entries);
  static Term rank_one(int block, Vec v, double weight = 1.0);
  static Term identity(int block, double scale = 1.0);
  static Term dense_term(int block, Mat m);
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::Eq;
  double rhs = 0.0;
};

class Problem {
 public:
  // Returns the block index. Dim is the complex dimension (1 = scalar).
  int add_block(int dim);
  void add_objective(Term t);
  int add_constraint(Sense sense, double rhs);
  void add_term(int constraint, Term t);
  void set_maximize(bool m) { maximize_ = m; }

  int block_count() const { return static_cast<int>(block_dims_.size()); }
  int block_dim(int k) const { return block_dims_[k]; }
  int constraint_count() const { return static_cast<int>(constraints_.size()); }
  const Constraint& constraint(int i) const { return constraints_[i]; }
  const std::vector<Term>& objective() const { return objective_; }
  bool maximize() const { return maximize_; }

 private:
  void check_term(const Term& t) const;

  std::vector<int> block_dims_;
  std::vector<Term> objective_;
  std::vector<Constraint> constraints_;
  bool maximize_ = false;
};

struct Options {
  double feas_tol = 1e-9;
  double gap_tol = 1e-9;
  int max_iter = 200;
  double step_fraction = 0.98;
  // Divergence thresholds for infeasibility/unboundedness heuristics.
  double diverge_value = 1e8;
  double stall_residual = 1e-5;
  bool verbose = false;
};

struct Solution {
  Status status = Status::MaxIter;
  double primal_value = 0.0;
  double dual_value = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rel_gap = 0.0;
  std::vector<Mat> blocks;       // primal blocks (complex Hermitian)
  std::vector<Mat> dual_blocks;  // dual slack blocks Z
  std::vector<double> y;         // constraint multipliers (also the Farkas-type
                                 // certificate direction when Infeasible)
};

Solution solve(const Problem& p, const Options& opts = {});

struct VerifyReport {
  std::vector<double> constraint_residuals;  // signed violation per constraint
  std::vector<double> block_min_eigs;
  double objective = 0.0;
  double max_violation = 0.0;
  bool feasible = false;
};

// Evaluates a candidate point against the constraints; never mutates it.
VerifyReport verify(const Problem& p, const std::vector<Mat>& blocks, double tol = 1e-7);

}  // namespace qconv::sdp
