#include <doctest.h>

#include "kcycle/model.hpp"
#include "kcycle/solver.hpp"

using namespace kcycle;

namespace {

KaleidocycleState bricard6() {
  Gauge g{6, ClosureMode::NonOriented, 0.0};
  SolverSettings s;
  SolveReport rep = solve_slice(g, s);
  REQUIRE(rep.converged);
  return *rep.state;
}

}  // namespace

TEST_CASE("mobility estimate") {
  CHECK(mobility_estimate(6, std::vector<int>(6, 1)) == 0);
  CHECK(mobility_estimate(9, std::vector<int>(9, 1)) == 3);
  CHECK(mobility_estimate(2, {1}) == 1);
  for (int n = 1; n <= 40; ++n)
    CHECK(mobility_estimate(n, std::vector<int>(static_cast<size_t>(n), 1)) == n - 6);
}

TEST_CASE("gamma_from_b rejects parallel hinges") {
  KaleidocycleState s;
  s.n = 6;
  s.mode = ClosureMode::Oriented;
  s.c = 1.0;
  s.b.assign(6, Vec3(0, 0, 1));
  CHECK_THROWS_AS(gamma_from_b(s), DegenerateError);
}

TEST_CASE("gamma_from_b orthogonal pair gives unit segment") {
  KaleidocycleState s;
  s.n = 6;
  s.mode = ClosureMode::Oriented;
  s.c = 0.0;
  // alternating pattern, exact solution for oriented even n
  for (int i = 0; i < 6; ++i)
    s.b.push_back(i % 2 == 0 ? Vec3(0, 0, 1) : Vec3(0, 1, 0));
  CenterLine cl = gamma_from_b(s);
  CHECK((cl.segments[0] - Vec3(-1, 0, 0)).norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(cl.segments[0].norm() == doctest::Approx(1.0));
}

TEST_CASE("solved Bricard state closes") {
  KaleidocycleState s = bricard6();
  CenterLine cl = gamma_from_b(s);
  CHECK(cl.closure_defect.norm() < 1e-10);

  SUBCASE("segment lengths are sqrt(1-c^2)") {
    for (const Vec3& e : cl.segments)
      CHECK(std::abs(e.norm() - std::sqrt(1.0 - s.c * s.c)) < 1e-10);
  }

  SUBCASE("validate_state accepts solver output") {
    CHECK(validate_state(s, 1e-8).valid);
  }

  SUBCASE("scaling one hinge breaks unit norm by the expected amount") {
    KaleidocycleState bad = s;
    bad.b[3] *= 1.1;
    ValidationSummary v = validate_state(bad, 1e-8);
    CHECK_FALSE(v.valid);
    CHECK(v.unit_norm_defect == doctest::Approx(1.1 * 1.1 - 1.0).epsilon(1e-12));
  }
}

TEST_CASE("trivial all-parallel state validates at c=1") {
  KaleidocycleState s;
  s.n = 8;
  s.mode = ClosureMode::Oriented;
  s.c = 1.0;
  s.b.assign(8, Vec3(0, 0, 1));
  CHECK(validate_state(s, 1e-15).valid);
}

TEST_CASE("seam independence of the center line") {
  KaleidocycleState s = bricard6();
  CenterLine cl = gamma_from_b(s);

  // explicitly extend b with b_n = -b_0 and recompute segments directly
  std::vector<Vec3> ext = s.b;
  ext.push_back(-s.b[0]);
  ext.push_back(-s.b[1]);
  for (int i = 0; i < s.n; ++i) {
    Vec3 e = ext[static_cast<size_t>(i)].cross(ext[static_cast<size_t>(i + 1)]);
    CHECK((e - cl.segments[static_cast<size_t>(i)]).norm() <= 1e-15);
  }
}

TEST_CASE("base point is respected") {
  KaleidocycleState s = bricard6();
  Vec3 base(3.5, -1.0, 2.0);
  CenterLine cl = gamma_from_b(s, base);
  CHECK((cl.gamma[0] - base).norm() == 0.0);
}
