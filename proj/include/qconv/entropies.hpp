#pragma once

#include "qconv/channels.hpp"
#include "qconv/matqi.hpp"
#include "qconv/sdp.hpp"

#include <optional>

namespace qconv {

// All entropies use the binary logarithm.

double binary_entropy(double p);
double von_neumann(const DensityOperator& rho);
double von_neumann(const Mat& rho);
// S(A|B) = S(AB) - S(B) for the named subsystems.
double conditional_entropy(const DensityOperator& rho, const std::vector<std::string>& a,
                           const std::vector<std::string>& b);

// I(A>B) = S(B) - S(AB) evaluated on (id (x) N) of a purification of the input.
double coherent_information(const Channel& ch, const DensityOperator& input);

struct Q1Options {
  int restarts = 20;
  int max_iter = 500;
  double tol = 1e-10;
  std::uint64_t seed = 20130;
  double grid_step = 1e-3;  // qubit fallback grid over diagonal spectra
};

struct Q1Result {
  double value = 0.0;
  Mat optimizer;          // input density matrix achieving the reported value
  double grid_value = 0;  // qubit diagonal-grid cross-check (when applicable)
  int iterations = 0;
  bool converged = false;
};

Q1Result q1(const Channel& ch, const Q1Options& opts = {});

struct EntropyQuery {
  DensityOperator state;
  std::vector<std::string> target;
  std::vector<std::string> conditioning;
  double eps = 0.0;

  EntropyQuery(DensityOperator s, std::vector<std::string> a, std::vector<std::string> b,
               double e = 0.0);
  EntropyQuery(const PureState& s, std::vector<std::string> a, std::vector<std::string> b,
               double e = 0.0);
};

// Exact (eps = 0) conditional min/max entropy via the small SDP
// min Tr sigma s.t. rho <= 1 (x) sigma; hmax by duality on an internally
// constructed purification.
double hmin(const EntropyQuery& q);
double hmax(const EntropyQuery& q);

struct SmoothEntropyResult {
  double value = 0.0;           // H^eps
  double exponent = 0.0;        // 2^{-H^eps} (the SDP optimum)
  sdp::Status status = sdp::Status::MaxIter;
  double rel_gap = 0.0;
  int iterations = 0;
  // Dual certificate (r, s, X) for the dual program
  //   max delta r - s  s.t.  r psi <= X (x) 1 + s 1,  Tr_target X <= 1.
  double dual_r = 0.0;
  double dual_s = 0.0;
  Mat dual_x;  // on target (x) conditioner
};

// Smooth min-entropy via the primal SDP over subnormalized global states
// rho' with Tr rho' psi >= 1 - eps^2, where psi purifies the reduced state.
SmoothEntropyResult hmin_smooth_full(const EntropyQuery& q, const sdp::Options& so = {});
double hmin_smooth(const EntropyQuery& q);
SmoothEntropyResult hmax_smooth_full(const EntropyQuery& q, const sdp::Options& so = {});
double hmax_smooth(const EntropyQuery& q);

struct DualCheck {
  bool feasible = false;
  double value = 0.0;          // delta * r - s
  double min_eig_operator = 0.0;  // min eig of X (x) 1 + s 1 - r psi
  double min_eig_x = 0.0;
  double trace_violation = 0.0;   // max eig of Tr_target X - 1
};

// Verifies a dual candidate for H^eps_min(target|cond) evaluated on the pure
// state psi (ordered target, conditioner, rest); returns delta*r - s which
// lower-bounds 2^{-H^eps_min} when feasible.
DualCheck hmin_smooth_dual_value(const PureState& psi, const std::vector<std::string>& target,
                                 const std::vector<std::string>& cond, double delta, double r,
                                 double s, const Mat& x, double tol = 1e-8);

struct AepParams {
  double mu_b = 0.0;
  double mu_c = 0.0;
  int n = 1;
  double eps = 0.5;
};

enum class AepSide { MinLower, MaxUpper };

// n S(A|B) -/+ (mu_B + mu_C) sqrt(n ln(2/eps)).
double aep_bound(const AepParams& p, double cond_entropy, AepSide side);

// Typical projector of rho^{(x) n} with deviation Delta*sqrt(n); sign +1 keeps
// strings of log-probability sum below n S + Delta sqrt(n), sign -1 those
// above n S - Delta sqrt(n). The Hoeffding weight bound is checked on return.
Mat typical_projector(const Mat& rho, int n, double delta, int sign);

// Joint reference/output/environment state of a maximally entangled input of
// rank d through the canonical 50% erasure dilation:
//   (1/sqrt2)(Phi^{AE} |*>^{E'} + Phi^{AE'} |*>^{E}),  labels A, E, E'.
PureState half_erasure_state(int d);

}  // namespace qconv
