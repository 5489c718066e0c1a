#include <doctest.h>

#include <chrono>
#include <random>
#include <sstream>

#include "conic_corpus.hpp"
#include "irsopt/conic/cones.hpp"
#include "irsopt/conic/solver.hpp"
#include "irsopt/errors.hpp"

using namespace irsopt;
using namespace irsopt::conic;

namespace {

// Distance-minimizing point of the exponential cone found by a 1-D search
// over the ray ratio x/y of the boundary {y (r, 1, e^r)}, plus the two
// degenerate faces.  Independent of project_exp.
Eigen::Vector3d exp_projection_oracle(const Eigen::Vector3d& v) {
  if (v(1) > 0.0 && v(1) * std::exp(v(0) / v(1)) <= v(2)) return v;
  auto ray_point = [&](double r) {
    const Eigen::Vector3d dir(r, 1.0, std::exp(r));
    const double s = std::max(0.0, v.dot(dir) / dir.squaredNorm());
    return Eigen::Vector3d(s * dir);
  };
  auto dist = [&](double r) { return (ray_point(r) - v).squaredNorm(); };
  double best_r = -30.0, best = dist(best_r);
  for (int i = 0; i <= 200000; ++i) {
    const double r = -30.0 + 60.0 * i / 200000.0;
    const double d = dist(r);
    if (d < best) best = d, best_r = r;
  }
  double lo = best_r - 60.0 / 200000.0, hi = best_r + 60.0 / 200000.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  while (hi - lo > 1e-12) {
    const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    if (dist(a) < dist(b)) hi = b; else lo = a;
  }
  Eigen::Vector3d cand = ray_point(0.5 * (lo + hi));
  const Eigen::Vector3d face(std::min(v(0), 0.0), 0.0, std::max(v(2), 0.0));
  if ((face - v).squaredNorm() < (cand - v).squaredNorm()) cand = face;
  if (v.squaredNorm() < (cand - v).squaredNorm()) cand.setZero();
  return cand;
}

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = nd(rng);
  return (m + m.transpose()) / 2.0;
}

}  // namespace

TEST_CASE("svec packing preserves the matrix inner product") {
  std::mt19937_64 rng(3);
  const auto x = random_symmetric(rng, 4), y = random_symmetric(rng, 4);
  CHECK(svec(x).dot(svec(y)) == doctest::Approx((x * y).trace()).epsilon(1e-12));
  CHECK((smat(svec(x), 4) - x).norm() < 1e-14);
  CHECK(packed_order(10) == 4);
  CHECK(packed_order(11) == -1);
}

TEST_CASE("project_psd") {
  SUBCASE("identity is kept") {
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
    CHECK((project_psd(id) - id).norm() < 1e-14);
  }
  SUBCASE("negative identity maps to zero") {
    CHECK(project_psd(-Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
  }
  SUBCASE("random symmetric against an eigendecomposition oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const auto m = random_symmetric(rng, 5);
      const auto p = project_psd(m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
      Eigen::MatrixXd neg = eig.eigenvectors() * eig.eigenvalues().cwiseMin(0.0).asDiagonal() *
                            eig.eigenvectors().transpose();
      CHECK((p - (m - neg)).norm() < 1e-10);
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p).eigenvalues().minCoeff() > -1e-10);
      // residual is orthogonal to the projection
      CHECK(std::abs(((m - p) * p).trace()) < 1e-10);
    }
  }
}

TEST_CASE("project_soc") {
  CHECK((project_soc(Eigen::Vector3d(2, 1, 0)) - Eigen::Vector3d(2, 1, 0)).norm() == 0.0);
  CHECK(project_soc(Eigen::Vector3d(-2, 1, 0)).norm() == 0.0);
  // (t, z) = (0, 1, 1): ((t + |z|) / 2) (1, z / |z|) = (sqrt2/2, 1/2, 1/2)
  const Eigen::VectorXd p = project_soc(Eigen::Vector3d(0, 1, 1));
  CHECK(p(0) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
  CHECK(p(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p(2) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("project_exp") {
  SUBCASE("interior point is kept") {
    const Eigen::Vector3d v(0, 1, 2);
    CHECK((project_exp(v) - v).norm() == 0.0);
  }
  SUBCASE("polar point maps to the origin") {
    CHECK(project_exp(Eigen::Vector3d(0, 0, -1)).norm() == 0.0);
  }
  SUBCASE("(1,1,1) matches the ray-search oracle") {
    const Eigen::Vector3d v(1, 1, 1);
    const auto p = project_exp(v);
    const auto o = exp_projection_oracle(v);
    CHECK((p - o).norm() < 1e-8);
    CHECK(in_exp_cone(p, 1e-10));
  }
  SUBCASE("random points against the oracle") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
      const Eigen::Vector3d v(nd(rng), nd(rng), nd(rng));
      const auto p = project_exp(v);
      CHECK(in_exp_cone(p, 1e-10));
      CHECK((p - exp_projection_oracle(v)).norm() < 1e-7 * std::max(1.0, v.norm()));
    }
  }
}

TEST_CASE("projections are idempotent and nearest among sampled cone members") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  auto check_variational = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& p, auto&& sample_member) {
    const double dv = (v - p).norm();
    for (int i = 0; i < 1000; ++i) {
      const Eigen::VectorXd w = sample_member();
      REQUIRE(dv <= (v - w).norm() + 1e-9);
    }
  };
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd v(4);
    for (int i = 0; i < 4; ++i) v(i) = nd(rng);
    const auto p = project_soc(v);
    CHECK((project_soc(p) - p).norm() < 1e-14);
    check_variational(v, p, [&] {
      Eigen::VectorXd z(3);
      for (int i = 0; i < 3; ++i) z(i) = nd(rng);
      Eigen::VectorXd w(4);
      w << z.norm() + std::abs(nd(rng)), z;
      return w;
    });

    const Eigen::Vector3d e3(nd(rng), nd(rng), nd(rng));
    const Eigen::Vector3d pe = project_exp(e3);
    CHECK((project_exp(pe) - pe).norm() < 1e-10);
    check_variational(e3, pe, [&] {
      const double y = std::abs(nd(rng)), x = nd(rng);
      return Eigen::VectorXd(Eigen::Vector3d(x, y, y * std::exp(x / std::max(y, 1e-3)) + std::abs(nd(rng))));
    });

    const auto m = random_symmetric(rng, 3);
    const auto pm = project_psd(m);
    CHECK((project_psd(pm) - pm).norm() < 1e-12);
    check_variational(svec(m), svec(pm), [&] {
      Eigen::MatrixXd g(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g(i, j) = nd(rng);
      return Eigen::VectorXd(svec(Eigen::MatrixXd(g * g.transpose())));
    });
  }
}

TEST_CASE("hermitian_embed") {
  using C = std::complex<double>;
  SUBCASE("order-1 identity") {
    Eigen::MatrixXcd h(1, 1);
    h(0, 0) = 1.0;
    CHECK((hermitian_embed(h) - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  }
  SUBCASE("[[0, j], [-j, 0]] has eigenvalues +-1, each twice") {
    Eigen::MatrixXcd h(2, 2);
    h << C(0, 0), C(0, 1), C(0, -1), C(0, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hermitian_embed(h));
    CHECK(eig.eigenvalues()(0) == doctest::Approx(-1.0));
    CHECK(eig.eigenvalues()(1) == doctest::Approx(-1.0));
    CHECK(eig.eigenvalues()(2) == doctest::Approx(1.0));
    CHECK(eig.eigenvalues()(3) == doctest::Approx(1.0));
  }
  SUBCASE("zero and trace doubling") {
    CHECK(hermitian_embed(Eigen::MatrixXcd::Zero(3, 3)).norm() == 0.0);
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Random(3, 3);
    Eigen::MatrixXcd h = r * r.adjoint();
    CHECK(hermitian_embed(h).trace() == doctest::Approx(2.0 * h.trace().real()));
  }
}

TEST_CASE("solve: closed-form corpus") {
  for (const auto& entry : testing::conic_corpus()) {
    CAPTURE(entry.name);
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve(entry.problem, {.tol = 1e-8});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(std::abs(sol.objective - entry.optimum) <= 1e-6);
    CHECK(sol.residuals.max() <= 1e-6);
    CHECK(secs <= 1.0);
  }
}

TEST_CASE("solve: psd trace problem lands on diag(1, 0)") {
  const auto corpus = testing::conic_corpus();
  const auto& p = corpus[8];
  REQUIRE(p.name == "psd_trace");
  const auto sol = solve(p.problem);
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(sol.x(1)) < 1e-6);
  CHECK(std::abs(sol.x(2)) < 1e-6);
}

TEST_CASE("solve: optimality conditions on the corpus") {
  for (const auto& entry : testing::conic_corpus()) {
    CAPTURE(entry.name);
    const auto sol = solve(entry.problem, {.tol = 1e-8});
    REQUIRE(sol.status == SolveStatus::Optimal);
    const auto& p = entry.problem;
    const double cx = p.c.dot(sol.x), by = p.b.dot(sol.y);
    CHECK(std::abs(cx + by) <= 1e-8 * (1.0 + std::abs(cx) + std::abs(by)));
    CHECK((p.a * sol.x + sol.s - p.b).norm() <= 1e-6);
    Eigen::VectorXd s = sol.s, y = sol.y;
    project_onto_cones(p.cones, s);
    project_onto_dual_cones(p.cones, y);
    CHECK((s - sol.s).norm() <= 1e-7);
    CHECK((y - sol.y).norm() <= 1e-7);
  }
}

TEST_CASE("solve: infeasible and unbounded certificates") {
  using conic::Affine;
  {
    ProblemBuilder pb;
    auto x = pb.add_variables("x", 1);
    pb.add_cost(x, 1.0);
    pb.add_nonneg({Affine::var(x).add(Affine(-1.0)), Affine::var(x, -1.0)});  // x >= 1, x <= 0
    CHECK(solve(pb.build()).status == SolveStatus::Infeasible);
  }
  {
    ProblemBuilder pb;
    auto x = pb.add_variables("x", 1);
    pb.add_cost(x, 1.0);
    pb.add_nonneg(Affine::var(x, -1.0));  // x <= 0, minimize x
    CHECK(solve(pb.build()).status == SolveStatus::Unbounded);
  }
}

TEST_CASE("solve: deterministic and warm-startable") {
  const auto corpus = testing::conic_corpus();
  const auto& p = corpus.back().problem;
  const auto a = solve(p), b = solve(p);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
  const auto warm = solve(p, {}, WarmStart{a.x, a.y, a.s});
  CHECK(warm.status == SolveStatus::Optimal);
  CHECK(warm.iterations <= a.iterations);
}

TEST_CASE("malformed problems are rejected") {
  auto p = testing::conic_corpus()[0].problem;
  SUBCASE("cone rows do not cover A") {
    p.cones.push_back({ConeKind::Nonneg, 2});
    CHECK_THROWS_AS(solve(p), DimensionError);
  }
  SUBCASE("exp cone of wrong size") {
    p.cones = {{ConeKind::Exp, 1}};
    CHECK_THROWS_AS(solve(p), DimensionError);
  }
  SUBCASE("NaN data") {
    p.c(0) = std::nan("");
    CHECK_THROWS_AS(solve(p), DomainError);
  }
}

TEST_CASE("dump writes dimensions, triplets and cones") {
  std::ostringstream os;
  testing::conic_corpus()[5].problem.dump(os);
  const auto text = os.str();
  CHECK(text.find("rows 3 cols 1") == 0);
  CHECK(text.find("exp 3") != std::string::npos);
  CHECK(text.find("var p 0 1") != std::string::npos);
}
