#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qconv/matqi.hpp"
#include "qconv/sdp.hpp"

#include <cmath>
#include <cstring>

using namespace qconv;
namespace S = qconv::sdp;

TEST_CASE("scalar bound: min t s.t. t >= 1") {
  S::Problem p;
  int t = p.add_block(1);
  p.add_objective(S::Term::identity(t, 1.0));
  int c = p.add_constraint(S::Sense::Ge, 1.0);
  p.add_term(c, S::Term::identity(t, 1.0));
  auto sol = S::solve(p);
  CHECK(sol.status == S::Status::Optimal);
  CHECK(sol.primal_value == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(sol.primal_value - sol.dual_value) <= 1e-6 * (1 + std::abs(sol.primal_value)));
}

TEST_CASE("H_min(A|B) of Phi_2 via min Tr sigma s.t. Phi <= 1 x sigma") {
  // Build with generic Hermitian-basis equality constraints.
  Mat phi = maximally_entangled(2);
  S::Problem p;
  const int db = 2, da = 2, D = 4;
  const int sig = p.add_block(db);
  const int slk = p.add_block(D);
  p.add_objective(S::Term::identity(sig, 1.0));
  for (int p1 = 0; p1 < D; ++p1)
    for (int q1 = p1; q1 < D; ++q1) {
      const int xa = p1 / db, za = p1 % db;
      const int xb = q1 / db, zb = q1 % db;
      for (int reim = 0; reim < (p1 == q1 ? 1 : 2); ++reim) {
        const cxd unit = reim == 0 ? cxd(1, 0) : cxd(0, 1);
        // <E, 1 x sigma> - <E, T> = <E, rho> for Hermitian basis E.
        const double rhs =
            (p1 == q1) ? phi(p1, q1).real()
                       : (reim == 0 ? 2.0 * phi(p1, q1).real() : 2.0 * phi(p1, q1).imag());
        const int ci = p.add_constraint(S::Sense::Eq, rhs);
        p.add_term(ci, S::Term::sparse(slk, {{p1, q1, -unit}}));
        if (xa == xb) p.add_term(ci, S::Term::sparse(sig, {{za, zb, unit}}));
      }
    }
  (void)da;
  auto sol = S::solve(p);
  CHECK(sol.status == S::Status::Optimal);
  // Analytic optimum: sigma = identity, Tr sigma = 2, so H_min = -1.
  CHECK(sol.primal_value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(-std::log2(sol.primal_value) == doctest::Approx(-1.0).epsilon(1e-7));
  // Solver returns PSD blocks and small residuals.
  CHECK(min_eigenvalue(sol.blocks[0]) >= -1e-8);
  CHECK(sol.primal_residual <= 1e-7);

  // verify() on the solver output reports feasibility.
  auto rep = S::verify(p, sol.blocks, 1e-6);
  CHECK(rep.feasible);
  CHECK(rep.objective == doctest::Approx(sol.primal_value).epsilon(1e-7));

  // Perturbing one block flags a residual of matching size.
  auto blocks = sol.blocks;
  blocks[1](0, 0) += 1e-3;
  auto rep2 = S::verify(p, blocks, 1e-6);
  CHECK(!rep2.feasible);
  CHECK(rep2.max_violation == doctest::Approx(1e-3).epsilon(0.2));
}

TEST_CASE("infeasible: X PSD with Tr X = -1") {
  S::Problem p;
  int x = p.add_block(2);
  int c = p.add_constraint(S::Sense::Eq, -1.0);
  p.add_term(c, S::Term::identity(x, 1.0));
  auto sol = S::solve(p);
  CHECK(sol.status == S::Status::Infeasible);
}

TEST_CASE("deterministic across runs") {
  Mat phi = maximally_entangled(2);
  auto build = [&]() {
    S::Problem p;
    const int sig = p.add_block(2);
    const int slk = p.add_block(4);
    p.add_objective(S::Term::identity(sig, 1.0));
    for (int p1 = 0; p1 < 4; ++p1)
      for (int q1 = p1; q1 < 4; ++q1)
        for (int reim = 0; reim < (p1 == q1 ? 1 : 2); ++reim) {
          const cxd unit = reim == 0 ? cxd(1, 0) : cxd(0, 1);
          const double rhs = (p1 == q1) ? phi(p1, q1).real()
                                        : (reim == 0 ? 2.0 * phi(p1, q1).real()
                                                     : 2.0 * phi(p1, q1).imag());
          const int ci = p.add_constraint(S::Sense::Eq, rhs);
          p.add_term(ci, S::Term::sparse(slk, {{p1, q1, -unit}}));
          if (p1 / 2 == q1 / 2) p.add_term(ci, S::Term::sparse(sig, {{p1 % 2, q1 % 2, unit}}));
        }
    return p;
  };
  auto s1 = S::solve(build());
  auto s2 = S::solve(build());
  CHECK(std::memcmp(&s1.primal_value, &s2.primal_value, sizeof(double)) == 0);
  CHECK(s1.iterations == s2.iterations);
}
