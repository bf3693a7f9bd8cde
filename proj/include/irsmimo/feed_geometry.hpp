#pragma once

// Placement of the active feeds in front of the surface, the fixed feed-to-surface
// transfer matrix T, and the closed-form feed pattern / loss formulas.

#include "irsmimo/channel.hpp"
#include "irsmimo/core.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace irsmimo {

enum class Illumination { FI, PI, SI, BlockageFreePI, UniformSI };

inline std::string_view to_string(Illumination s) {
  switch (s) {
    case Illumination::FI: return "FI";
    case Illumination::PI: return "PI";
    case Illumination::SI: return "SI";
    case Illumination::BlockageFreePI: return "BFPI";
    case Illumination::UniformSI: return "USI";
  }
  return "?";
}

inline Illumination parse_illumination(std::string_view s) {
  if (s == "FI") return Illumination::FI;
  if (s == "PI") return Illumination::PI;
  if (s == "SI") return Illumination::SI;
  if (s == "BFPI" || s == "BlockageFreePI") return Illumination::BlockageFreePI;
  if (s == "USI" || s == "UniformSI") return Illumination::UniformSI;
  throw ConfigError("unknown illumination strategy '" + std::string(s) + "'");
}

/// Strategies whose feeds are physically shielded from foreign sub-surfaces.
inline bool is_shielded(Illumination s) {
  return s == Illumination::SI || s == Illumination::UniformSI;
}

struct IlluminationConfig {
  Illumination strategy = Illumination::SI;
  Index num_feeds = 4;
  ArrayGeometry surface;
  double ring_radius = 0.0;     // meters
  double feed_distance = 0.0;   // meters, along +x
  double feed_exponent = 49.0;  // kappa
  double surface_efficiency = 1.0;
  std::optional<Eigen::Vector3d> ring_center;  // overrides the strategy default

  Eigen::Vector3d center() const {
    if (ring_center) return *ring_center;
    if (strategy == Illumination::BlockageFreePI) {
      const double half = 0.5 * surface.element_spacing * static_cast<double>(surface.side());
      return {feed_distance, half, half};
    }
    return {feed_distance, 0.0, 0.0};
  }

  void validate() const {
    surface.validate();
    require(num_feeds >= 1, "geometry: number of feeds must be >= 1");
    require(feed_distance > 0.0, "geometry: feed distance must be positive");
    require(ring_radius >= 0.0, "geometry: ring radius must be non-negative");
    require(feed_exponent >= 2.0, "geometry: feed exponent kappa must be >= 2");
    require(surface_efficiency > 0.0 && surface_efficiency <= 1.0,
            "geometry: surface efficiency must lie in (0, 1]");
    require(surface.num_elements % num_feeds == 0,
            "geometry: N=" + std::to_string(num_feeds) + " does not divide M=" +
                std::to_string(surface.num_elements));
  }

  /// Default ring/distance rules: S1 for FI and blockage-free PI, S2 otherwise.
  static IlluminationConfig with_default_scaling(Illumination strategy, Index num_feeds,
                                                 const ArrayGeometry& surface, double kappa,
                                                 double efficiency) {
    IlluminationConfig c;
    c.strategy = strategy;
    c.num_feeds = num_feeds;
    c.surface = surface;
    c.feed_exponent = kappa;
    c.surface_efficiency = efficiency;
    const double d = surface.element_spacing;
    const double m = static_cast<double>(surface.num_elements);
    const double n = static_cast<double>(num_feeds);
    if (strategy == Illumination::FI || strategy == Illumination::BlockageFreePI) {
      c.feed_distance = 4.0 * d * std::sqrt(m) / std::sqrt(kPi);
      c.ring_radius = 2.0 * d;
    } else {
      c.feed_distance = 4.0 * d * std::sqrt(m) / std::sqrt(n * kPi);
      c.ring_radius = d * std::sqrt(2.0 * m) / 4.0;
    }
    return c;
  }
};

struct FeedLayout {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3d> boresights;  // unit vectors
  Eigen::MatrixXd distance;                 // r_{m,n}, M x N
  Eigen::MatrixXd theta;                    // off-boresight angle, M x N
  Eigen::MatrixXd phi;                      // azimuth about boresight, M x N
  std::vector<std::vector<Index>> partition;  // M_n, one per feed
  std::vector<Index> owner;                   // owner[m] = n with m in M_n
  bool far_field = true;                      // every r_{m,n} >= 5 lambda

  Index num_feeds() const { return static_cast<Index>(positions.size()); }
};

struct TransferMatrix {
  CMatrix matrix;  // M x N
  FeedLayout layout;
  IlluminationConfig config;
};

/// Splits the surface into N contiguous sub-surfaces: a sqrt(N) x sqrt(N) grid of
/// squares when N is a perfect square, otherwise N strips along y.
inline std::vector<std::vector<Index>> surface_partition(const ArrayGeometry& g, Index n) {
  require(n >= 1, "partition: N must be >= 1");
  const Index side = g.side();
  std::vector<std::vector<Index>> parts(static_cast<std::size_t>(n));
  const Index grid = exact_sqrt(n);
  if (grid > 0) {
    require(side % grid == 0, "partition: sqrt(N)=" + std::to_string(grid) +
                                  " does not divide the surface side " + std::to_string(side));
    const Index block = side / grid;
    for (Index m = 0; m < g.num_elements; ++m) {
      const Index id = g.row_of(m) / block + grid * (g.col_of(m) / block);
      parts[static_cast<std::size_t>(id)].push_back(m);
    }
  } else {
    require(side % n == 0, "partition: N=" + std::to_string(n) +
                               " does not divide the surface side " + std::to_string(side));
    const Index block = side / n;
    for (Index m = 0; m < g.num_elements; ++m) {
      parts[static_cast<std::size_t>(g.row_of(m) / block)].push_back(m);
    }
  }
  return parts;
}

namespace detail {

inline Eigen::Vector3d centroid(const ArrayGeometry& g, const std::vector<Index>& ids) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (Index m : ids) c += g.position(m);
  return c / static_cast<double>(ids.size());
}

// Feed-to-sub-surface assignment minimizing total distance; exhaustive for N <= 8.
inline std::vector<std::size_t> assign_subsurfaces(const std::vector<Eigen::Vector3d>& feeds,
                                                   const std::vector<Eigen::Vector3d>& centroids) {
  const std::size_t n = feeds.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  auto cost = [&](const std::vector<std::size_t>& p) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += (feeds[i] - centroids[p[i]]).norm();
    return c;
  };
  if (n <= 8) {
    std::vector<std::size_t> best = perm;
    double best_cost = cost(perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
      const double c = cost(perm);
      if (c < best_cost - 1e-15) {
        best_cost = c;
        best = perm;
      }
    }
    return best;
  }
  std::vector<bool> taken(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (taken[k]) continue;
      if (pick == n || (feeds[i] - centroids[k]).norm() < (feeds[i] - centroids[pick]).norm()) pick = k;
    }
    taken[pick] = true;
    perm[i] = pick;
  }
  return perm;
}

// Off-boresight angle and azimuth of w in the frame whose axis is b.
inline std::pair<double, double> boresight_angles(const Eigen::Vector3d& b, const Eigen::Vector3d& w) {
  const double cos_t = std::clamp(b.dot(w) / w.norm(), -1.0, 1.0);
  Eigen::Vector3d ref = std::abs(b.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d u = b.cross(ref).normalized();
  const Eigen::Vector3d v = b.cross(u);
  double phi = std::atan2(w.dot(v), w.dot(u));
  if (phi < 0.0) phi += 2.0 * kPi;
  return {std::acos(cos_t), phi};
}

}  // namespace detail

inline FeedLayout place_feeds(const IlluminationConfig& cfg) {
  cfg.validate();
  const ArrayGeometry& g = cfg.surface;
  const Index n_feeds = cfg.num_feeds;
  const auto subsurfaces = surface_partition(g, n_feeds);

  std::vector<Eigen::Vector3d> centroids;
  centroids.reserve(subsurfaces.size());
  for (const auto& s : subsurfaces) centroids.push_back(detail::centroid(g, s));

  // Ring in the plane x = R_d; offset pi/4 puts a feed over each quadrant centroid for N = 4.
  const bool grid = exact_sqrt(n_feeds) > 0 && n_feeds > 1;
  const double offset = grid ? kPi / 4.0 : 0.0;
  const Eigen::Vector3d c = cfg.center();

  FeedLayout layout;
  for (Index n = 0; n < n_feeds; ++n) {
    const double psi = offset + 2.0 * kPi * static_cast<double>(n) / static_cast<double>(n_feeds);
    layout.positions.push_back(c + cfg.ring_radius * Eigen::Vector3d(0.0, std::cos(psi), std::sin(psi)));
  }

  const auto perm = detail::assign_subsurfaces(layout.positions, centroids);
  layout.owner.assign(static_cast<std::size_t>(g.num_elements), 0);
  for (Index n = 0; n < n_feeds; ++n) {
    const auto k = perm[static_cast<std::size_t>(n)];
    layout.partition.push_back(subsurfaces[k]);
    for (Index m : subsurfaces[k]) layout.owner[static_cast<std::size_t>(m)] = n;
    const Eigen::Vector3d target =
        cfg.strategy == Illumination::FI ? Eigen::Vector3d::Zero() : centroids[k];
    layout.boresights.push_back((target - layout.positions[static_cast<std::size_t>(n)]).normalized());
  }

  const Index m_count = g.num_elements;
  layout.distance.resize(m_count, n_feeds);
  layout.theta.resize(m_count, n_feeds);
  layout.phi.resize(m_count, n_feeds);
  for (Index n = 0; n < n_feeds; ++n) {
    const auto& p = layout.positions[static_cast<std::size_t>(n)];
    const auto& b = layout.boresights[static_cast<std::size_t>(n)];
    for (Index m = 0; m < m_count; ++m) {
      const Eigen::Vector3d w = g.position(m) - p;
      const auto [t, az] = detail::boresight_angles(b, w);
      layout.distance(m, n) = w.norm();
      layout.theta(m, n) = t;
      layout.phi(m, n) = az;
    }
  }
  layout.far_field = layout.distance.minCoeff() >= 5.0 * g.wavelength;
  return layout;
}

/// Axisymmetric feed pattern G = 2 (1 + kappa) cos^kappa(theta) on the front hemisphere.
inline double feed_gain(double kappa, double theta) {
  if (theta < 0.0 || theta > kPi / 2.0) return 0.0;
  return 2.0 * (1.0 + kappa) * std::pow(std::cos(theta), kappa);
}

inline TransferMatrix build_uniform_si(const IlluminationConfig& cfg, const FeedLayout& layout);

inline TransferMatrix build_transfer_matrix(const IlluminationConfig& cfg, const FeedLayout& layout) {
  if (cfg.strategy == Illumination::UniformSI) return build_uniform_si(cfg, layout);
  const double lambda = cfg.surface.wavelength;
  const Index m_count = cfg.surface.num_elements;
  const Index n_feeds = layout.num_feeds();
  CMatrix t(m_count, n_feeds);
  for (Index n = 0; n < n_feeds; ++n) {
    for (Index m = 0; m < m_count; ++m) {
      const double r = layout.distance(m, n);
      const double g = feed_gain(cfg.feed_exponent, layout.theta(m, n));
      const double mag = lambda * std::sqrt(cfg.surface_efficiency * g) / (4.0 * kPi * r);
      t(m, n) = std::polar(mag, -2.0 * kPi * r / lambda);
    }
  }
  if (is_shielded(cfg.strategy)) {
    for (Index m = 0; m < m_count; ++m) {
      const Index own = layout.owner[static_cast<std::size_t>(m)];
      for (Index n = 0; n < n_feeds; ++n) {
        if (n != own) t(m, n) = 0.0;
      }
    }
  }
  return {std::move(t), layout, cfg};
}

/// theta0 = atan((d / R_d) sqrt(M / pi)) for the equal-area circular surface.
inline double angular_extent(double num_elements, double spacing, double feed_distance) {
  require(num_elements > 0 && spacing > 0 && feed_distance > 0, "angular_extent: arguments must be positive");
  return std::atan(spacing / feed_distance * std::sqrt(num_elements / kPi));
}

/// Constant-modulus illumination of each sub-surface; only the path phases survive.
inline TransferMatrix build_uniform_si(const IlluminationConfig& cfg, const FeedLayout& layout) {
  require(cfg.strategy == Illumination::UniformSI, "build_uniform_si: strategy must be UniformSI");
  const double lambda = cfg.surface.wavelength;
  const Index m_count = cfg.surface.num_elements;
  const Index n_feeds = layout.num_feeds();

  double mean_r = 0.0;
  for (Index n = 0; n < n_feeds; ++n) {
    for (Index m : layout.partition[static_cast<std::size_t>(n)]) mean_r += layout.distance(m, n);
  }
  mean_r /= static_cast<double>(m_count);

  const double theta0 = angular_extent(static_cast<double>(m_count) / static_cast<double>(n_feeds),
                                       cfg.surface.element_spacing, cfg.feed_distance);
  const double c = lambda / (4.0 * kPi * mean_r) *
                   std::sqrt(2.0 * cfg.surface_efficiency / (1.0 - std::cos(theta0)));

  CMatrix t = CMatrix::Zero(m_count, n_feeds);
  for (Index n = 0; n < n_feeds; ++n) {
    for (Index m : layout.partition[static_cast<std::size_t>(n)]) {
      t(m, n) = std::polar(c, -2.0 * kPi * layout.distance(m, n) / lambda);
    }
  }
  return {std::move(t), layout, cfg};
}

inline TransferMatrix build_transfer_matrix(const IlluminationConfig& cfg) {
  return build_transfer_matrix(cfg, place_feeds(cfg));
}

/// rho_S = 1 - cos^(kappa + 1)(theta0), circular surface under broadside illumination.
inline double spillover_efficiency(double kappa, double theta0) {
  require(kappa >= 2.0, "spillover: kappa must be >= 2");
  require(theta0 > 0.0 && theta0 <= kPi / 2.0, "spillover: theta0 must lie in (0, pi/2]");
  return 1.0 - std::pow(std::cos(theta0), kappa + 1.0);
}

/// Taper efficiency; the kappa = 2 removable singularity uses its analytic limit.
inline double taper_efficiency(double kappa, double theta0) {
  require(kappa >= 2.0, "taper: kappa must be >= 2");
  require(theta0 > 0.0 && theta0 < kPi / 2.0, "taper: theta0 must lie in (0, pi/2)");
  const double c = std::cos(theta0);
  const double sec_minus_one = 1.0 / c - 1.0;
  if (std::abs(kappa - 2.0) < 1e-6) {
    const double lc = std::log(c);
    return lc * lc / ((1.0 - c) * sec_minus_one);
  }
  const double half = kappa / 2.0 - 1.0;
  const double num = 1.0 - std::pow(c, half);
  return (kappa - 1.0) / (half * half) * num * num / ((1.0 - std::pow(c, kappa - 1.0)) * sec_minus_one);
}

/// sigma_max / sigma_min; +infinity when T is numerically rank deficient.
inline double condition_number(const CMatrix& t) {
  Eigen::JacobiSVD<CMatrix> svd(t);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) throw NumericalError("condition_number: zero matrix");
  if (svd.rank() < std::min(t.rows(), t.cols())) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

inline double condition_number(const TransferMatrix& t) { return condition_number(t.matrix); }

/// Fraction of each feed's radiated power intercepted by the surface, summing the
/// solid angle d^2 cos(alpha) / r^2 of every element weighted by the feed pattern
/// recovered from |T|. Shielded strategies only count the feed's own sub-surface.
inline RVector discrete_spillover(const TransferMatrix& t) {
  const auto& cfg = t.config;
  const auto& lay = t.layout;
  const double lambda = cfg.surface.wavelength;
  const double cell = cfg.surface.element_spacing * cfg.surface.element_spacing;
  const Index n_feeds = lay.num_feeds();
  RVector rho(n_feeds);
  for (Index n = 0; n < n_feeds; ++n) {
    const double feed_x = std::abs(lay.positions[static_cast<std::size_t>(n)].x());
    double acc = 0.0;
    auto add = [&](Index m) {
      const double cos_alpha = feed_x / lay.distance(m, n);
      acc += std::norm(t.matrix(m, n)) * 4.0 * kPi * cell * cos_alpha /
             (lambda * lambda * cfg.surface_efficiency);
    };
    if (is_shielded(cfg.strategy)) {
      for (Index m : lay.partition[static_cast<std::size_t>(n)]) add(m);
    } else {
      for (Index m = 0; m < t.matrix.rows(); ++m) add(m);
    }
    rho(n) = std::min(acc, 1.0);
  }
  return rho;
}

/// Debug dump: n, m, r_{m,n}, theta_{m,n}, |T_{m,n}| (zero-based indices).
inline void write_geometry_csv(std::ostream& os, const TransferMatrix& t) {
  os << "n,m,r_m,theta_rad,abs_T\n";
  const auto old = os.precision(9);
  for (Index n = 0; n < t.matrix.cols(); ++n) {
    for (Index m = 0; m < t.matrix.rows(); ++m) {
      os << n << ',' << m << ',' << t.layout.distance(m, n) << ',' << t.layout.theta(m, n) << ','
         << std::abs(t.matrix(m, n)) << '\n';
    }
  }
  os.precision(old);
}

}  // namespace irsmimo
