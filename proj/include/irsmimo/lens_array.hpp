#pragma once

// Lens-array (LA) benchmark: K feeds on the focal surface of a fixed phase-shifting lens,
// N of which are switched to the RF chains.

#include "irsmimo/feed_geometry.hpp"
#include "irsmimo/precoders.hpp"

namespace irsmimo {

struct LensConfig {
  ArrayGeometry lens;
  Index num_feeds = 64;  // K
  double feed_exponent = 49.0;
  double surface_efficiency = 1.0;
  double max_steer_rad = 80.0 * kPi / 180.0;  // largest off-axis beam angle covered by the feeds

  /// Focal distance 4 lambda sqrt(M / pi).
  double focal_distance() const {
    return 4.0 * lens.wavelength * std::sqrt(static_cast<double>(lens.num_elements) / kPi);
  }

  void validate() const {
    lens.validate();
    require(num_feeds >= 1, "lens: K must be >= 1");
    require(feed_exponent >= 2.0, "lens: feed exponent must be >= 2");
    require(surface_efficiency > 0.0 && surface_efficiency <= 1.0, "lens: efficiency must lie in (0, 1]");
    require(max_steer_rad > 0.0 && max_steer_rad < kPi / 2.0, "lens: max steering angle must lie in (0, pi/2)");
  }
};

struct LensArray {
  LensConfig config;
  std::vector<Eigen::Vector3d> feed_positions;
  CMatrix transfer;     // M x K
  CVector phases;       // fixed lens phases, M
  RVector spillover;    // fraction of each feed's power captured by the lens
};

inline LensArray build_lens_array(const LensConfig& cfg) {
  cfg.validate();
  const ArrayGeometry& g = cfg.lens;
  const double lambda = g.wavelength;
  const double fd = cfg.focal_distance();
  const Index k_count = cfg.num_feeds;
  const Index m_count = g.num_elements;
  const double s_max = std::sin(cfg.max_steer_rad);

  LensArray la;
  la.config = cfg;
  la.transfer.resize(m_count, k_count);
  la.spillover.resize(k_count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (Index k = 0; k < k_count; ++k) {
    // Sunflower sampling of the transverse direction cosines over a disc of radius s_max;
    // feed k sits on the focal sphere and is imaged towards (u_y, u_z).
    const double radius =
        k_count == 1 ? 0.0 : s_max * std::sqrt(static_cast<double>(k) / static_cast<double>(k_count - 1));
    const double uy = radius * std::cos(golden * static_cast<double>(k));
    const double uz = radius * std::sin(golden * static_cast<double>(k));
    const Eigen::Vector3d p = fd * Eigen::Vector3d(std::sqrt(1.0 - uy * uy - uz * uz), uy, uz);
    la.feed_positions.push_back(p);
    const Eigen::Vector3d bore = (-p).normalized();
    double captured = 0.0;
    for (Index m = 0; m < m_count; ++m) {
      const Eigen::Vector3d w = g.position(m) - p;
      const double r = w.norm();
      const double theta = std::acos(std::clamp(bore.dot(w) / r, -1.0, 1.0));
      const double gain = feed_gain(cfg.feed_exponent, theta);
      la.transfer(m, k) = std::polar(lambda * std::sqrt(cfg.surface_efficiency * gain) / (4.0 * kPi * r),
                                     -2.0 * kPi * r / lambda);
      // Solid angle of the element cell weighted by the normalized pattern.
      captured += gain * g.element_spacing * g.element_spacing * std::abs(p.x()) / (4.0 * kPi * r * r * r);
    }
    la.spillover(k) = std::min(captured, 1.0);
  }

  const Eigen::Vector3d focus(fd, 0.0, 0.0);
  la.phases.resize(m_count);
  for (Index m = 0; m < m_count; ++m) {
    la.phases(m) = std::polar(1.0, 2.0 * kPi * (g.position(m) - focus).norm() / lambda);
  }
  return la;
}

/// OMP-style LA design: each RF chain takes the residual's strongest path and switches on
/// the feed whose lens beam has the largest gain along it.
inline Precoder la_precoder(const CMatrix& h, const CMatrix& ht, const LensArray& la, double gamma,
                            Index rf_chains, Index streams,
                            const std::optional<CMatrix>& fd_target = std::nullopt) {
  require(h.cols() == la.transfer.rows() && ht.rows() == h.cols(), "la: dimensions disagree");
  require(rf_chains >= 1 && rf_chains <= la.transfer.cols(), "la: N must lie in [1, K]");
  require(streams >= 1 && streams <= rf_chains && streams <= h.rows(), "la: Q must lie in [1, min(N, J)]");
  const CMatrix f_opt = fd_target ? *fd_target : fd_optimal(h, gamma, streams).effective;
  const CMatrix dt = la.phases.asDiagonal() * la.transfer;  // M x K

  CMatrix residual = f_opt;
  CMatrix selected(h.cols(), 0);
  BasebandSolution fit;
  std::vector<Index> paths;
  std::vector<Index> feeds;
  unsigned flags = kNone;
  for (Index n = 0; n < rf_chains; ++n) {
    const Index l = detail::argmax_row_energy(ht.adjoint() * residual);
    const Eigen::RowVectorXcd beam = ht.col(l).adjoint() * dt;
    Index k_best = 0;
    for (Index k = 1; k < beam.size(); ++k) {
      if (std::abs(beam(k)) > std::abs(beam(k_best))) k_best = k;
    }
    if (std::find(feeds.begin(), feeds.end(), k_best) != feeds.end()) flags |= kDuplicateSelection;
    paths.push_back(l);
    feeds.push_back(k_best);
    selected.conservativeResize(Eigen::NoChange, n + 1);
    selected.col(n) = la.transfer.col(k_best);
    fit = detail::normalized_fit(la.phases.asDiagonal() * selected, f_opt);
    residual = f_opt - la.phases.asDiagonal() * selected * fit.baseband;
  }
  if (fit.flags & kDegenerateResidual) throw NumericalError("la: least-squares fit vanished");
  Precoder p = detail::finish(Architecture::LA, la.phases, std::move(selected), std::move(fit.baseband));
  p.selected_paths = std::move(paths);
  p.selected_antennas = std::move(feeds);
  p.flags = flags | fit.flags;
  return p;
}

/// Mean captured fraction over the switched-on feeds.
inline double selected_spillover(const LensArray& la, const std::vector<Index>& feeds) {
  require(!feeds.empty(), "la: no feeds selected");
  double acc = 0.0;
  for (Index k : feeds) acc += la.spillover(k);
  return acc / static_cast<double>(feeds.size());
}

}  // namespace irsmimo
