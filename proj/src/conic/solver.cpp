#include "irsopt/conic/solver.hpp"

#include <algorithm>
#include <cmath>

#include "irsopt/conic/cones.hpp"
#include "irsopt/errors.hpp"

namespace irsopt::conic {

namespace {

using Eigen::VectorXd;

constexpr double kMinScale = 1e-4;
constexpr double kMaxScale = 1e4;

bool is_vector_cone(ConeKind kind) {
  return kind == ConeKind::SecondOrder || kind == ConeKind::Exp || kind == ConeKind::Psd;
}

// Ruiz equilibration of A. Rows inside one non-separable cone share a single
// factor so that scaling keeps the cone invariant.
void equilibrate(SpMat& a, const std::vector<ConeBlock>& cones, int passes, VectorXd& d, VectorXd& e) {
  const Index m = a.rows(), n = a.cols();
  d = VectorXd::Ones(m);
  e = VectorXd::Ones(n);
  for (int pass = 0; pass < passes; ++pass) {
    VectorXd row = VectorXd::Zero(m), col = VectorXd::Zero(n);
    for (Index k = 0; k < a.outerSize(); ++k) {
      for (SpMat::InnerIterator it(a, k); it; ++it) {
        const double v = std::abs(it.value());
        row(it.row()) = std::max(row(it.row()), v);
        col(it.col()) = std::max(col(it.col()), v);
      }
    }
    Index base = 0;
    for (const auto& cone : cones) {
      if (is_vector_cone(cone.kind) && cone.dim > 0) {
        const double mean = row.segment(base, cone.dim).mean();
        row.segment(base, cone.dim).setConstant(mean);
      }
      base += cone.dim;
    }
    VectorXd dr(m), dc(n);
    for (Index i = 0; i < m; ++i) dr(i) = row(i) > 0 ? 1.0 / std::sqrt(row(i)) : 1.0;
    for (Index j = 0; j < n; ++j) dc(j) = col(j) > 0 ? 1.0 / std::sqrt(col(j)) : 1.0;
    for (Index i = 0; i < m; ++i) dr(i) = std::clamp(d(i) * dr(i), kMinScale, kMaxScale) / d(i);
    for (Index j = 0; j < n; ++j) dc(j) = std::clamp(e(j) * dc(j), kMinScale, kMaxScale) / e(j);
    a = dr.asDiagonal() * a * dc.asDiagonal();
    d.array() *= dr.array();
    e.array() *= dc.array();
  }
}

double mean_row_norm(const SpMat& a) {
  if (a.rows() == 0) return 1.0;
  VectorXd row = VectorXd::Zero(a.rows());
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a, k); it; ++it) row(it.row()) += it.value() * it.value();
  }
  return row.cwiseSqrt().mean();
}

double mean_col_norm(const SpMat& a) {
  if (a.cols() == 0) return 1.0;
  VectorXd col(a.cols());
  for (Index k = 0; k < a.outerSize(); ++k) col(k) = a.col(k).norm();
  return col.mean();
}

}  // namespace

void project_onto_cones(const std::vector<ConeBlock>& cones, Eigen::Ref<VectorXd> v) {
  Index base = 0;
  for (const auto& cone : cones) {
    auto seg = v.segment(base, cone.dim);
    switch (cone.kind) {
      case ConeKind::Zero: seg.setZero(); break;
      case ConeKind::Nonneg: seg = seg.cwiseMax(0.0); break;
      case ConeKind::SecondOrder: project_soc_inplace(seg); break;
      case ConeKind::Exp: seg = project_exp(Eigen::Vector3d(seg)); break;
      case ConeKind::Psd: project_psd_packed(seg, cone.order); break;
    }
    base += cone.dim;
  }
}

void project_onto_dual_cones(const std::vector<ConeBlock>& cones, Eigen::Ref<VectorXd> v) {
  Index base = 0;
  for (const auto& cone : cones) {
    auto seg = v.segment(base, cone.dim);
    switch (cone.kind) {
      case ConeKind::Zero: break;
      case ConeKind::Nonneg: seg = seg.cwiseMax(0.0); break;
      case ConeKind::SecondOrder: project_soc_inplace(seg); break;
      case ConeKind::Exp: seg = project_exp_dual(Eigen::Vector3d(seg)); break;
      case ConeKind::Psd: project_psd_packed(seg, cone.order); break;
    }
    base += cone.dim;
  }
}

ConicSolution solve(const ConicProblem& problem, const SolverOptions& options,
                    const std::optional<WarmStart>& warm) {
  problem.validate();
  const Index n = problem.num_vars();
  const Index m = problem.num_rows();
  const Index len = n + m + 1;

  // scaled data: A_s = D A E,  b_s = sb D b,  c_s = sc E c
  SpMat a = problem.a;
  VectorXd d, e;
  equilibrate(a, problem.cones, options.scale_passes, d, e);
  VectorXd b = d.cwiseProduct(problem.b);
  VectorXd c = e.cwiseProduct(problem.c);
  const double sb = options.scale * mean_row_norm(a) / std::max(b.norm(), kMinScale);
  const double sc = options.scale * mean_col_norm(a) / std::max(c.norm(), kMinScale);
  b *= sb;
  c *= sc;
  const SpMat at = a.transpose();

  // (I + A'A) factor for the (I + M) solves, M = [0 A'; -A 0]
  Eigen::MatrixXd gram = Eigen::MatrixXd(at * a);
  gram.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw SolverError("conic solve: factorization failed");

  auto solve_im = [&](const VectorXd& rx, const VectorXd& ry, VectorXd& x, VectorXd& y) {
    x = llt.solve(rx - at * ry);
    y = ry + a * x;
  };

  VectorXd gx, gy;
  solve_im(c, b, gx, gy);
  const double h_dot_g = c.dot(gx) + b.dot(gy);

  VectorXd u = VectorXd::Zero(len), v = VectorXd::Zero(len);
  if (warm && warm->x.size() == n && warm->y.size() == m && warm->s.size() == m) {
    u.head(n) = warm->x.cwiseQuotient(e) * sb;
    u.segment(n, m) = warm->y.cwiseQuotient(d) * sc;
    u(n + m) = 1.0;
    v.segment(n, m) = warm->s.cwiseProduct(d) * sb;
    project_onto_dual_cones(problem.cones, u.segment(n, m));
    project_onto_cones(problem.cones, v.segment(n, m));
  } else {
    u(n + m) = std::sqrt(static_cast<double>(len));
    v(n + m) = std::sqrt(static_cast<double>(len));
  }

  const double nb = problem.b.norm(), nc = problem.c.norm();
  ConicSolution sol;
  sol.x = VectorXd::Zero(n);
  sol.y = VectorXd::Zero(m);
  sol.s = VectorXd::Zero(m);

  auto recover = [&](double tau) {
    sol.x = e.cwiseProduct(u.head(n)) / (tau * sb);
    sol.y = d.cwiseProduct(u.segment(n, m)) / (tau * sc);
    sol.s = v.segment(n, m).cwiseQuotient(d) / (tau * sb);
  };

  auto residuals = [&]() {
    Residuals r;
    const VectorXd ax = problem.a * sol.x;
    r.primal = (ax + sol.s - problem.b).norm() / (1.0 + nb);
    r.dual = (problem.a.transpose() * sol.y + problem.c).norm() / (1.0 + nc);
    const double cx = problem.c.dot(sol.x), by = problem.b.dot(sol.y);
    r.gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));
    return r;
  };

  VectorXd ut(len), px, py, w(len);
  const double alpha = options.alpha;

  // One splitting step (u, v) -> (u+, v+).
  auto step = [&](VectorXd& uu, VectorXd& vv) {
    // u~ = (I + Q)^{-1} (u + v)
    w = uu + vv;
    solve_im(w.head(n), w.segment(n, m), px, py);
    const double hp = c.dot(px) + b.dot(py);
    const double ztau = (w(n + m) + hp) / (1.0 + h_dot_g);
    ut.head(n) = px - ztau * gx;
    ut.segment(n, m) = py - ztau * gy;
    ut(n + m) = ztau;

    ut = alpha * ut + (1.0 - alpha) * uu;
    VectorXd next = ut - vv;
    project_onto_dual_cones(problem.cones, next.segment(n, m));
    next(n + m) = std::max(next(n + m), 0.0);
    vv += next - ut;
    uu = std::move(next);
  };

  // Type-II Anderson acceleration on z = (u, v) with a residual safeguard.
  const int mem = std::max(options.anderson_memory, 0);
  Eigen::MatrixXd dg(2 * len, mem), df(2 * len, mem);
  // dg' dg, updated one column at a time
  Eigen::MatrixXd dg_gram = Eigen::MatrixXd::Zero(mem, mem);
  int filled = 0, slot = 0;
  VectorXd z(2 * len), f(2 * len), g(2 * len), f_prev, g_prev, f_base;
  double g_base = 0.0;
  bool accelerated = false;
  z << u, v;

  int it = 0;
  for (; it < options.max_iter; ++it) {
    u = z.head(len);
    v = z.tail(len);
    step(u, v);
    if (mem > 0) {
      f << u, v;
      g = z - f;
      if (accelerated && g.norm() > options.anderson_safeguard * g_base) {
        // Rejected: resume from the plain step of the last base point.
        z = f_base;
        filled = 0;
        slot = 0;
        accelerated = false;
        f_prev.resize(0);
        continue;
      }
    }

    if ((it + 1) % options.check_every == 0 || it + 1 == options.max_iter) {
      const double tau = u(n + m), kappa = v(n + m);
      bool done = false;
      if (tau > 1e-12) {
        recover(tau);
        sol.residuals = residuals();
        if (sol.residuals.max() <= options.tol) {
          sol.status = SolveStatus::Optimal;
          done = true;
        }
      }
      if (!done && tau < kappa) {
        const VectorXd ydir = d.cwiseProduct(u.segment(n, m));
        const double by = problem.b.dot(ydir);
        const VectorXd xdir = e.cwiseProduct(u.head(n));
        const VectorXd sdir = v.segment(n, m).cwiseQuotient(d);
        const double cx = problem.c.dot(xdir);
        if (by < 0.0 && (problem.a.transpose() * ydir).norm() <= options.tol * -by) {
          sol.status = SolveStatus::Infeasible;
          sol.y = ydir / -by;
          done = true;
        } else if (cx < 0.0 && (problem.a * xdir + sdir).norm() <= options.tol * -cx) {
          sol.status = SolveStatus::Unbounded;
          sol.x = xdir / -cx;
          done = true;
        }
      }
      if (done) break;
    }

    if (mem == 0) {
      z << u, v;
      continue;
    }
    if (f_prev.size() == f.size()) {
      dg.col(slot) = g - g_prev;
      df.col(slot) = f - f_prev;
      filled = std::min(filled + 1, mem);
      for (int j = 0; j < filled; ++j) {
        dg_gram(j, slot) = dg_gram(slot, j) = dg.col(j).dot(dg.col(slot));
      }
      slot = (slot + 1) % mem;
    }
    g_prev = g;
    f_prev = f;
    f_base = f;
    g_base = g.norm();
    if (filled == 0) {
      z = f;
      accelerated = false;
      continue;
    }
    const auto dgl = dg.leftCols(filled);
    Eigen::MatrixXd gram_aa = dg_gram.topLeftCorner(filled, filled);
    gram_aa.diagonal().array() += 1e-10 * gram_aa.trace() + 1e-300;
    const VectorXd gamma = gram_aa.ldlt().solve(dgl.transpose() * g);
    if (!gamma.allFinite()) {
      z = f;
      accelerated = false;
      continue;
    }
    z = f - df.leftCols(filled) * gamma;
    accelerated = true;
  }
  sol.iterations = std::min(it + 1, options.max_iter);
  if (sol.status != SolveStatus::Infeasible && sol.status != SolveStatus::Unbounded) {
    const double tau = u(n + m);
    if (tau > 1e-12) {
      recover(tau);
      sol.residuals = residuals();
    }
  }
  sol.objective = problem.c.dot(sol.x);
  return sol;
}

}  // namespace irsopt::conic
