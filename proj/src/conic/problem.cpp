#include "irsopt/conic/problem.hpp"

#include <cmath>
#include <ostream>

#include "irsopt/conic/cones.hpp"
#include "irsopt/errors.hpp"

namespace irsopt::conic {

const char* to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::Zero: return "zero";
    case ConeKind::Nonneg: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
    case ConeKind::Exp: return "exp";
    case ConeKind::Psd: return "psd";
  }
  return "?";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIter: return "max_iter";
  }
  return "?";
}

void ConicProblem::validate() const {
  if (a.rows() != b.size() || a.cols() != c.size()) {
    throw DimensionError("conic problem: A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " but b has " + std::to_string(b.size()) + " rows and c has " +
                         std::to_string(c.size()) + " entries");
  }
  Index total = 0;
  for (const auto& cone : cones) {
    if (cone.dim < 0) throw DimensionError("conic problem: negative cone dimension");
    switch (cone.kind) {
      case ConeKind::Exp:
        if (cone.dim != 3) throw DimensionError("conic problem: exponential cone must have dimension 3");
        break;
      case ConeKind::Psd:
        if (cone.order < 1 || packed_size(cone.order) != cone.dim) {
          throw DimensionError("conic problem: psd block dimension does not match order");
        }
        break;
      case ConeKind::SecondOrder:
        if (cone.dim < 1) throw DimensionError("conic problem: empty second-order cone");
        break;
      default:
        break;
    }
    total += cone.dim;
  }
  if (total != b.size()) {
    throw DimensionError("conic problem: cones cover " + std::to_string(total) + " rows, A has " +
                         std::to_string(b.size()));
  }
  if (!c.allFinite() || !b.allFinite()) throw DomainError("conic problem: non-finite entry in b or c");
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      if (!std::isfinite(it.value())) throw DomainError("conic problem: non-finite entry in A");
    }
  }
}

void ConicProblem::dump(std::ostream& os) const {
  os.precision(17);
  os << "rows " << num_rows() << " cols " << num_vars() << " nnz " << a.nonZeros() << "\n";
  os << "cones " << cones.size() << "\n";
  for (const auto& cone : cones) {
    os << to_string(cone.kind) << " " << cone.dim;
    if (cone.kind == ConeKind::Psd) os << " order " << cone.order;
    os << "\n";
  }
  os << "c";
  for (Index j = 0; j < c.size(); ++j) os << " " << c(j);
  os << "\nb";
  for (Index i = 0; i < b.size(); ++i) os << " " << b(i);
  os << "\nA\n";
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
    }
  }
  for (const auto& [name, range] : variable_map) {
    os << "var " << name << " " << range.first << " " << range.second << "\n";
  }
}

Affine& Affine::add(const Affine& other, double scale) {
  for (const auto& [j, v] : other.terms) add(j, scale * v);
  constant += scale * other.constant;
  return *this;
}

Index ProblemBuilder::add_variables(const std::string& name, Index count) {
  const Index first = n_;
  names_[name] = {first, count};
  n_ += count;
  return first;
}

void ProblemBuilder::add_cost(Index j, double coef) { cost_.emplace_back(j, coef); }

void ProblemBuilder::add_psd(const std::vector<Affine>& packed_rows, Index order) {
  if (static_cast<Index>(packed_rows.size()) != packed_size(order)) {
    throw DimensionError("psd block: row count does not match order");
  }
  add_block(ConeKind::Psd, packed_rows, order);
}

void ProblemBuilder::add_block(ConeKind kind, const std::vector<Affine>& rows, Index order) {
  const Index base = static_cast<Index>(b_.size());
  for (Index r = 0; r < static_cast<Index>(rows.size()); ++r) {
    // expr(x) = s  with  s = b - A x
    for (const auto& [j, v] : rows[r].terms) {
      if (j < 0 || j >= n_) throw DimensionError("constraint references an undeclared variable");
      triplets_.emplace_back(base + r, j, -v);
    }
    b_.push_back(rows[r].constant);
  }
  cones_.push_back({kind, static_cast<Index>(rows.size()), order});
}

ConicProblem ProblemBuilder::build() const {
  ConicProblem p;
  p.c = Eigen::VectorXd::Zero(n_);
  for (const auto& [j, v] : cost_) p.c(j) += v;
  p.b = Eigen::Map<const Eigen::VectorXd>(b_.data(), static_cast<Index>(b_.size()));
  p.a.resize(static_cast<Index>(b_.size()), n_);
  p.a.setFromTriplets(triplets_.begin(), triplets_.end());
  p.a.makeCompressed();
  p.cones = cones_;
  p.variable_map = names_;
  return p;
}

}  // namespace irsopt::conic
