#include "irsopt/hybrid.hpp"

#include <cmath>
#include <string>

#include "irsopt/channel.hpp"
#include "irsopt/errors.hpp"

namespace irsopt {

CMat steering_dictionary(int n_t, int grid_size) {
  if (n_t < 1 || grid_size < 1) throw DimensionError("steering_dictionary: sizes must be positive");
  CMat dict(n_t, grid_size);
  for (int i = 0; i < grid_size; ++i) {
    dict.col(i) = steering_vector<double>(n_t, -1.0 + 2.0 * i / grid_size);
  }
  return dict;
}

HybridFactors omp_decompose(const CMat& digital, const CMat& dictionary, int n_rf) {
  const Eigen::Index n_t = digital.rows();
  if (dictionary.cols() == 0) throw DimensionError("omp_decompose: empty dictionary");
  if (dictionary.rows() != n_t) throw DimensionError("omp_decompose: dictionary rows differ from N_t");
  if (n_rf < 1) throw DomainError("omp_decompose: n_rf must be at least 1");
  if (n_rf > std::min<Eigen::Index>(n_t, dictionary.cols())) {
    throw DomainError("omp_decompose: n_rf exceeds min(N_t, dictionary size)");
  }

  // unit-modulus atoms
  CMat atoms = dictionary;
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    for (Eigen::Index i = 0; i < n_t; ++i) {
      const double r = std::abs(atoms(i, j));
      atoms(i, j) = r > 0.0 ? atoms(i, j) / r : cplx(1.0, 0.0);
    }
  }

  HybridFactors out;
  out.rf.resize(n_t, 0);
  std::vector<bool> used(static_cast<std::size_t>(atoms.cols()), false);
  CMat residual = digital;
  for (int pick = 0; pick < n_rf; ++pick) {
    const Vec corr = (atoms.adjoint() * residual).rowwise().squaredNorm();
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < corr.size(); ++j) {
      if (!used[static_cast<std::size_t>(j)] && (best < 0 || corr(j) > corr(best))) best = j;
    }
    used[static_cast<std::size_t>(best)] = true;
    out.rf.conservativeResize(Eigen::NoChange, pick + 1);
    out.rf.col(pick) = atoms.col(best);
    out.baseband = out.rf.completeOrthogonalDecomposition().solve(digital);
    residual = digital - out.rf * out.baseband;
    const double nrm = residual.norm();
    if (nrm > 0.0) residual /= nrm;
  }

  const double target = digital.norm();
  const double got = (out.rf * out.baseband).norm();
  if (got > 0.0) out.baseband *= target / got;
  out.residual = (digital - out.rf * out.baseband).norm();
  return out;
}

CMat stack_beamformers(const std::vector<CVec>& beamformers) {
  if (beamformers.empty()) return CMat(0, 0);
  CMat w(beamformers.front().size(), static_cast<Eigen::Index>(beamformers.size()));
  for (std::size_t k = 0; k < beamformers.size(); ++k) {
    if (beamformers[k].size() != w.rows()) throw DimensionError("stack_beamformers: lengths differ");
    w.col(static_cast<Eigen::Index>(k)) = beamformers[k];
  }
  return w;
}

std::vector<CVec> split_beamformers(const CMat& precoder) {
  std::vector<CVec> out;
  for (Eigen::Index k = 0; k < precoder.cols(); ++k) out.push_back(precoder.col(k));
  return out;
}

}  // namespace irsopt
