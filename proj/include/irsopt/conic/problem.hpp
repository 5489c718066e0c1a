#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace irsopt::conic {

using Index = Eigen::Index;
using SpMat = Eigen::SparseMatrix<double>;

enum class ConeKind { Zero, Nonneg, SecondOrder, Exp, Psd };

const char* to_string(ConeKind kind);

/// One contiguous block of slack rows. For Psd blocks `order` is the matrix
/// order and dim = order (order + 1) / 2.
struct ConeBlock {
  ConeKind kind;
  Index dim;
  Index order = 0;
};

/// minimize c'x  subject to  A x + s = b,  s in K = K_1 x ... x K_p.
struct ConicProblem {
  Eigen::VectorXd c;
  SpMat a;
  Eigen::VectorXd b;
  std::vector<ConeBlock> cones;
  /// name -> [first, first + count) variable range, diagnostics only.
  std::map<std::string, std::pair<Index, Index>> variable_map;

  Index num_vars() const { return c.size(); }
  Index num_rows() const { return b.size(); }

  /// Throws DimensionError on inconsistent cone spec, DomainError on NaN.
  void validate() const;

  /// Plain-text dump: dimensions, c, b, A triplets, cone list.
  void dump(std::ostream& os) const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

const char* to_string(SolveStatus status);

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double max() const { return std::max(primal, std::max(dual, gap)); }
};

struct ConicSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd s;
  SolveStatus status = SolveStatus::MaxIter;
  Residuals residuals;
  double objective = 0.0;
  int iterations = 0;
};

/// Sparse affine form  sum_j coef_j x_j + constant.
struct Affine {
  std::vector<std::pair<Index, double>> terms;
  double constant = 0.0;

  Affine() = default;
  explicit Affine(double c) : constant(c) {}
  static Affine var(Index j, double coef = 1.0) {
    Affine e;
    e.terms.emplace_back(j, coef);
    return e;
  }
  Affine& add(Index j, double coef) {
    if (coef != 0.0) terms.emplace_back(j, coef);
    return *this;
  }
  Affine& add(const Affine& other, double scale = 1.0);
  Affine& operator+=(double c) {
    constant += c;
    return *this;
  }
};

/// Incremental construction of a ConicProblem: declare variables, then add
/// cone constraints "expr_i(x) in K" row block by row block.
class ProblemBuilder {
 public:
  Index add_variables(const std::string& name, Index count);
  Index num_vars() const { return n_; }

  void add_cost(Index j, double coef);

  void add_zero(const std::vector<Affine>& rows) { add_block(ConeKind::Zero, rows); }
  void add_nonneg(const std::vector<Affine>& rows) { add_block(ConeKind::Nonneg, rows); }
  void add_nonneg(const Affine& row) { add_block(ConeKind::Nonneg, {row}); }
  /// (t, z_1, ..., z_d) with ||z|| <= t
  void add_soc(const std::vector<Affine>& rows) { add_block(ConeKind::SecondOrder, rows); }
  /// (x, y, z) with y e^{x/y} <= z
  void add_exp(const Affine& x, const Affine& y, const Affine& z) { add_block(ConeKind::Exp, {x, y, z}); }
  /// svec-packed rows of an order-n symmetric matrix
  void add_psd(const std::vector<Affine>& packed_rows, Index order);

  ConicProblem build() const;

 private:
  void add_block(ConeKind kind, const std::vector<Affine>& rows, Index order = 0);

  Index n_ = 0;
  std::vector<std::pair<Index, double>> cost_;
  std::vector<Eigen::Triplet<double>> triplets_;
  std::vector<double> b_;
  std::vector<ConeBlock> cones_;
  std::map<std::string, std::pair<Index, Index>> names_;
};

}  // namespace irsopt::conic
