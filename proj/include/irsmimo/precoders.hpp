#pragma once

// Precoder designs: fully digital (SVD + waterfilling), MI-greedy and OMP designs for
// surface-aided antennas, and the FC / PC hybrid benchmarks.

#include "irsmimo/channel.hpp"
#include "irsmimo/core.hpp"
#include "irsmimo/feed_geometry.hpp"
#include "irsmimo/linalg.hpp"
#include "irsmimo/waterfill.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace irsmimo {

enum class Architecture { FD, FC, PC, LA, IRS, ITS };

inline std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::FD: return "FD";
    case Architecture::FC: return "FC";
    case Architecture::PC: return "PC";
    case Architecture::LA: return "LA";
    case Architecture::IRS: return "IRS";
    case Architecture::ITS: return "ITS";
  }
  return "?";
}

/// F = D * A * B, where A is the fixed (or, for FC, selected) analog matrix.
struct Precoder {
  Architecture architecture = Architecture::FD;
  CVector phases;     // diagonal of D; empty when there is no phase matrix
  CMatrix analog;     // T, binary T, T_lens * S or the FC analog matrix R
  CMatrix baseband;   // B, N x Q
  CMatrix effective;  // F, M x Q
  std::vector<Index> selected_paths;
  std::vector<Index> selected_antennas;  // LA only
  unsigned flags = kNone;

  double baseband_power() const { return baseband.squaredNorm(); }
};

/// log2 |I_J + gamma H F F^H H^H|.
inline double rate(const CMatrix& h, const CMatrix& f, double gamma) {
  require(h.cols() == f.rows(), "rate: H and F dimensions disagree");
  return log2det_rate(h * f, gamma);
}

inline Precoder fd_optimal(const CMatrix& h, double gamma, Index streams) {
  require(streams >= 1 && streams <= std::min(h.rows(), h.cols()),
          "fd_optimal: Q must lie in [1, min(J, M)]");
  Eigen::BDCSVD<CMatrix> svd(h, Eigen::ComputeThinV);
  const RVector s2 = svd.singularValues().head(streams).array().square();
  const auto wf = waterfill(s2, gamma);
  Precoder p;
  p.architecture = Architecture::FD;
  p.effective = svd.matrixV().leftCols(streams) * wf.allocation.cwiseSqrt().asDiagonal();
  p.baseband = p.effective;
  return p;
}

/// Candidate phase vector with support M_n aligning T's column n to path l:
/// exp(j(arg Ht(m,l) - arg T(m,n))) on M_n, zero elsewhere. arg(0) is taken as 0.
inline CVector candidate_phases(const CMatrix& ht, const CMatrix& t, const std::vector<Index>& block,
                                Index feed, Index path) {
  CVector d = CVector::Zero(t.rows());
  for (Index m : block) d(m) = std::polar(1.0, std::arg(ht(m, path)) - std::arg(t(m, feed)));
  return d;
}

/// The N x L candidate set of masked phase vectors.
struct CandidateSet {
  std::vector<std::vector<CVector>> phases;  // [feed][path]

  Index num_feeds() const { return static_cast<Index>(phases.size()); }
  Index num_paths() const { return phases.empty() ? 0 : static_cast<Index>(phases.front().size()); }
  Index size() const { return num_feeds() * num_paths(); }
};

inline CandidateSet candidate_phase_matrices(const CMatrix& ht, const CMatrix& t,
                                             const std::vector<std::vector<Index>>& partition) {
  require(ht.rows() == t.rows(), "candidates: H_t and T row counts differ");
  require(static_cast<Index>(partition.size()) == t.cols(), "candidates: partition size must equal N");
  CandidateSet cs;
  cs.phases.resize(partition.size());
  for (Index n = 0; n < t.cols(); ++n) {
    auto& row = cs.phases[static_cast<std::size_t>(n)];
    row.reserve(static_cast<std::size_t>(ht.cols()));
    for (Index l = 0; l < ht.cols(); ++l) {
      row.push_back(candidate_phases(ht, t, partition[static_cast<std::size_t>(n)], n, l));
    }
  }
  return cs;
}

struct BasebandSolution {
  CMatrix baseband;
  double rate = 0.0;
  unsigned flags = kNone;
};

/// B = (C1^H C1)^(-1/2) V Z with V, Z from the SVD of H C1 (C1^H C1)^(-1/2) and waterfilling.
inline BasebandSolution baseband_opt(const CMatrix& h, const CMatrix& c1, double gamma, Index streams) {
  require(streams >= 1 && streams <= c1.cols(), "baseband_opt: Q must lie in [1, N]");
  const auto w = hermitian_inverse_sqrt(c1.adjoint() * c1);
  const CMatrix whitened = h * c1 * w.matrix;
  Eigen::BDCSVD<CMatrix> svd(whitened, Eigen::ComputeThinV);
  const Index usable = std::min(streams, svd.singularValues().size());
  RVector s2 = RVector::Zero(streams);
  s2.head(usable) = svd.singularValues().head(usable).array().square();
  const auto wf = waterfill(s2, gamma);

  CMatrix v = CMatrix::Zero(c1.cols(), streams);
  v.leftCols(usable) = svd.matrixV().leftCols(usable);
  BasebandSolution out;
  out.baseband = w.matrix * v * wf.allocation.cwiseSqrt().asDiagonal();
  out.rate = rate(h, c1 * out.baseband, gamma);
  out.flags = w.rank_deficient ? kSingularNormalMatrix : kNone;
  return out;
}

namespace detail {

inline Index argmax_row_energy(const CMatrix& psi) {
  Index best = 0;
  double best_val = -1.0;
  for (Index l = 0; l < psi.rows(); ++l) {
    const double v = psi.row(l).squaredNorm();
    if (v > best_val) {
      best_val = v;
      best = l;
    }
  }
  return best;
}

inline void check_surface_inputs(const CMatrix& h, const CMatrix& ht, const CMatrix& t,
                                 const std::vector<std::vector<Index>>& partition, Index streams) {
  require(h.cols() == t.rows(), "precoder: H columns must equal surface size M");
  require(ht.rows() == t.rows() && ht.cols() >= 1, "precoder: H_t must be M x L");
  require(static_cast<Index>(partition.size()) == t.cols(), "precoder: partition size must equal N");
  require(streams >= 1 && streams <= t.cols(), "precoder: Q must lie in [1, N]");
  require(streams <= h.rows(), "precoder: Q must not exceed J");
}

// Normalized least-squares fit of target onto span(c3) (unit Frobenius norm of c3 * B).
inline BasebandSolution normalized_fit(const CMatrix& c3, const CMatrix& target) {
  auto ls = normal_equations_solve(c3, target);
  BasebandSolution out;
  out.flags = ls.regularized ? kSingularNormalMatrix : kNone;
  const double norm = (c3 * ls.solution).norm();
  if (!(norm > 0.0)) {
    out.flags |= kDegenerateResidual;
    out.baseband = CMatrix::Zero(c3.cols(), target.cols());
    return out;
  }
  out.baseband = ls.solution / norm;
  return out;
}

inline Precoder finish(Architecture arch, CVector phases, CMatrix analog, CMatrix baseband) {
  Precoder p;
  p.architecture = arch;
  p.effective = phases.size() ? CMatrix(phases.asDiagonal() * analog * baseband) : CMatrix(analog * baseband);
  p.phases = std::move(phases);
  p.analog = std::move(analog);
  p.baseband = std::move(baseband);
  return p;
}

}  // namespace detail

/// Greedy MI design: feed blocks are fixed one at a time, each to the path candidate that
/// maximizes the rate with the optimal baseband; blocks not yet fixed stay switched off.
inline Precoder mi_precoder(const CMatrix& h, const CMatrix& ht, const CMatrix& t,
                            const std::vector<std::vector<Index>>& partition, double gamma,
                            Index streams, Architecture arch = Architecture::IRS) {
  detail::check_surface_inputs(h, ht, t, partition, streams);
  const Index n_feeds = t.cols();
  const Index n_paths = ht.cols();
  CVector d = CVector::Zero(t.rows());
  CMatrix b;
  unsigned flags = kNone;
  std::vector<Index> picks;
  for (Index n = 0; n < n_feeds; ++n) {
    double best_rate = -1.0;
    Index best_l = 0;
    CVector best_d;
    BasebandSolution best_b;
    for (Index l = 0; l < n_paths; ++l) {
      CVector trial = d + candidate_phases(ht, t, partition[static_cast<std::size_t>(n)], n, l);
      const CMatrix c1 = trial.asDiagonal() * t;
      auto sol = baseband_opt(h, c1, gamma, streams);
      if (sol.rate > best_rate) {
        best_rate = sol.rate;
        best_l = l;
        best_d = std::move(trial);
        best_b = std::move(sol);
      }
    }
    d = std::move(best_d);
    b = std::move(best_b.baseband);
    flags = best_b.flags;  // only the final, fully populated step matters
    picks.push_back(best_l);
  }
  Precoder p = detail::finish(arch, std::move(d), t, std::move(b));
  p.selected_paths = std::move(picks);
  p.flags = flags;
  return p;
}

/// OMP design approximating the fully digital precoder; fd_target defaults to fd_optimal(H).
inline Precoder omp_precoder(const CMatrix& h, const CMatrix& ht, const CMatrix& t,
                             const std::vector<std::vector<Index>>& partition, double gamma,
                             Index streams, Architecture arch = Architecture::IRS,
                             const std::optional<CMatrix>& fd_target = std::nullopt) {
  detail::check_surface_inputs(h, ht, t, partition, streams);
  const CMatrix f_opt = fd_target ? *fd_target : fd_optimal(h, gamma, streams).effective;
  require(f_opt.rows() == t.rows() && f_opt.cols() == streams, "omp: F_opt must be M x Q");

  CMatrix residual = f_opt;
  CVector d = CVector::Zero(t.rows());
  BasebandSolution fit;
  std::vector<Index> picks;
  for (Index n = 0; n < t.cols(); ++n) {
    const Index l = detail::argmax_row_energy(ht.adjoint() * residual);
    d += candidate_phases(ht, t, partition[static_cast<std::size_t>(n)], n, l);
    const CMatrix c3 = d.asDiagonal() * t;
    fit = detail::normalized_fit(c3, f_opt);
    residual = f_opt - c3 * fit.baseband;
    picks.push_back(l);
  }
  if (fit.flags & kDegenerateResidual) throw NumericalError("omp: least-squares fit vanished");
  Precoder p = detail::finish(arch, std::move(d), t, std::move(fit.baseband));
  p.selected_paths = std::move(picks);
  p.flags = fit.flags;
  return p;
}

inline Precoder mi_precoder(const CMatrix& h, const CMatrix& ht, const TransferMatrix& t, double gamma,
                            Index streams, Architecture arch = Architecture::IRS) {
  return mi_precoder(h, ht, t.matrix, t.layout.partition, gamma, streams, arch);
}

inline Precoder omp_precoder(const CMatrix& h, const CMatrix& ht, const TransferMatrix& t, double gamma,
                             Index streams, Architecture arch = Architecture::IRS,
                             const std::optional<CMatrix>& fd_target = std::nullopt) {
  return omp_precoder(h, ht, t.matrix, t.layout.partition, gamma, streams, arch, fd_target);
}

/// Spatially sparse FC hybrid precoder: OMP over the dictionary of path responses.
inline Precoder fc_sparse_precoder(const CMatrix& h, const CMatrix& ht, double gamma, Index rf_chains,
                                   Index streams, const std::optional<CMatrix>& fd_target = std::nullopt) {
  require(h.cols() == ht.rows(), "fc: H_t must have M rows");
  require(rf_chains >= 1, "fc: N must be >= 1");
  require(streams >= 1 && streams <= rf_chains, "fc: Q must lie in [1, N]");
  const CMatrix f_opt = fd_target ? *fd_target : fd_optimal(h, gamma, streams).effective;

  CMatrix analog(ht.rows(), 0);
  CMatrix residual = f_opt;
  BasebandSolution fit;
  std::vector<Index> picks;
  for (Index n = 0; n < rf_chains; ++n) {
    const Index l = detail::argmax_row_energy(ht.adjoint() * residual);
    analog.conservativeResize(Eigen::NoChange, n + 1);
    analog.col(n) = ht.col(l);
    // The residual uses the unnormalized fit so it stays orthogonal to the chosen columns.
    auto ls = normal_equations_solve(analog, f_opt);
    residual = f_opt - analog * ls.solution;
    picks.push_back(l);
  }
  fit = detail::normalized_fit(analog, f_opt);
  if (fit.flags & kDegenerateResidual) throw NumericalError("fc: least-squares fit vanished");
  Precoder p = detail::finish(Architecture::FC, CVector(), std::move(analog), std::move(fit.baseband));
  p.selected_paths = std::move(picks);
  p.flags = fit.flags;
  return p;
}

/// 0/1 matrix connecting RF chain n to the antennas of block M_n.
inline CMatrix binary_connection_matrix(Index num_antennas, const std::vector<std::vector<Index>>& partition) {
  CMatrix t = CMatrix::Zero(num_antennas, static_cast<Index>(partition.size()));
  for (std::size_t n = 0; n < partition.size(); ++n) {
    for (Index m : partition[n]) t(m, static_cast<Index>(n)) = 1.0;
  }
  return t;
}

/// PC hybrid precoder: the OMP design with the binary connection matrix in place of T.
inline Precoder pc_precoder(const CMatrix& h, const CMatrix& ht, const std::vector<std::vector<Index>>& partition,
                            double gamma, Index streams, const std::optional<CMatrix>& fd_target = std::nullopt) {
  const CMatrix tb = binary_connection_matrix(h.cols(), partition);
  return omp_precoder(h, ht, tb, partition, gamma, streams, Architecture::PC, fd_target);
}

}  // namespace irsmimo
