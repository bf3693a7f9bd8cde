#pragma once

#include "irsmimo/core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace irsmimo {

/// R = log2 |I + gamma A A^H| for A = H F, through a Cholesky factor of the smaller Gram matrix.
inline double log2det_rate(const CMatrix& hf, double gamma) {
  if (hf.size() == 0) return 0.0;
  const bool wide = hf.cols() <= hf.rows();
  CMatrix g = wide ? CMatrix(hf.adjoint() * hf) : CMatrix(hf * hf.adjoint());
  g *= gamma;
  g.diagonal().array() += 1.0;
  Eigen::LLT<CMatrix> llt(g);
  if (llt.info() != Eigen::Success) {
    // Cholesky can still fail on round-off for huge gamma; eigenvalues of a PSD matrix are safe.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
    return es.eigenvalues().array().max(1.0).log().sum() / std::log(2.0);
  }
  const auto& l = llt.matrixLLT();
  double acc = 0.0;
  for (Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc / std::log(2.0);
}

inline constexpr double kConditionLimit = 1e12;

struct InverseSqrt {
  CMatrix matrix;
  bool rank_deficient = false;
};

/// (G)^(-1/2) of a Hermitian PSD matrix; eigen-directions with lambda < lambda_max / 1e12
/// are dropped (pseudo-inverse) and reported.
inline InverseSqrt hermitian_inverse_sqrt(const CMatrix& g) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
  const RVector& w = es.eigenvalues();
  const double wmax = w.size() ? w.maxCoeff() : 0.0;
  if (!(wmax > 0.0)) throw NumericalError("inverse_sqrt: zero Gram matrix");
  RVector s(w.size());
  bool deficient = false;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) * kConditionLimit > wmax) {
      s(i) = 1.0 / std::sqrt(w(i));
    } else {
      s(i) = 0.0;
      deficient = true;
    }
  }
  const CMatrix& v = es.eigenvectors();
  return {v * s.asDiagonal() * v.adjoint(), deficient};
}

struct LeastSquares {
  CMatrix solution;
  bool regularized = false;
};

/// Solves (C^H C) X = C^H F. When the normal matrix has condition number above 1e12 a
/// Tikhonov term 1e-12 trace / N is added and the result is flagged.
inline LeastSquares normal_equations_solve(const CMatrix& c, const CMatrix& f) {
  CMatrix g = c.adjoint() * c;
  const CMatrix rhs = c.adjoint() * f;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
  const RVector& w = es.eigenvalues();
  const double wmax = w.maxCoeff();
  if (!(wmax > 0.0)) throw NumericalError("least squares: zero normal matrix");
  bool regularized = false;
  if (w.minCoeff() * kConditionLimit < wmax) {
    const double jitter = 1e-12 * g.trace().real() / static_cast<double>(g.rows());
    g.diagonal().array() += jitter;
    regularized = true;
  }
  return {g.ldlt().solve(rhs), regularized};
}

}  // namespace irsmimo
