#pragma once

// Sparse (Saleh-Valenzuela) mmWave channel: UPA array responses, path sampling,
// channel assembly and receiver noise.

#include "irsmimo/core.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <vector>

namespace irsmimo {

/// Square uniform planar array lying in the y-z plane.
struct ArrayGeometry {
  Index num_elements = 1;
  double element_spacing = 0.005;  // meters
  double wavelength = 0.01;        // meters

  ArrayGeometry() = default;
  ArrayGeometry(Index m, double spacing, double lambda)
      : num_elements(m), element_spacing(spacing), wavelength(lambda) {
    validate();
  }

  void validate() const {
    require(num_elements >= 1, "array: number of elements must be >= 1");
    require(exact_sqrt(num_elements) > 0,
            "array: number of elements " + std::to_string(num_elements) + " is not a perfect square");
    require(element_spacing > 0.0, "array: element spacing must be positive");
    require(wavelength > 0.0, "array: wavelength must be positive");
  }

  Index side() const { return exact_sqrt(num_elements); }

  // Column-major stacking: m_y runs fastest.
  Index index(Index my, Index mz) const { return my + side() * mz; }
  Index row_of(Index m) const { return m % side(); }  // m_y - 1
  Index col_of(Index m) const { return m / side(); }  // m_z - 1

  /// Element position, surface centered at the origin.
  Eigen::Vector3d position(Index m) const {
    const double half = 0.5 * static_cast<double>(side() - 1);
    return {0.0, (static_cast<double>(row_of(m)) - half) * element_spacing,
            (static_cast<double>(col_of(m)) - half) * element_spacing};
  }
};

struct Path {
  cdouble gain{1.0, 0.0};
  double aod_theta = 0.0;
  double aod_phi = 0.0;
  double aoa_theta = 0.0;
  double aoa_phi = 0.0;
};

struct PathSet {
  std::vector<Path> paths;
  double distance = 100.0;  // meters
  double exponent = 2.0;

  Index size() const { return static_cast<Index>(paths.size()); }
};

struct AngleRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Sampling intervals for elevation and azimuth at both ends of the link.
struct AngleRanges {
  AngleRange aod_theta{-2.0 * kPi / 3.0, 2.0 * kPi / 3.0};
  AngleRange aod_phi{-kPi / 2.0, kPi / 2.0};
  AngleRange aoa_theta{-2.0 * kPi / 3.0, 2.0 * kPi / 3.0};
  AngleRange aoa_phi{-kPi / 2.0, kPi / 2.0};

  /// Elevation restricted to [-pi/2, pi/2] at both ends.
  static AngleRanges half_elevation() {
    AngleRanges r;
    r.aod_theta = {-kPi / 2.0, kPi / 2.0};
    r.aoa_theta = {-kPi / 2.0, kPi / 2.0};
    return r;
  }
};

struct ChannelRealization {
  CMatrix matrix;  // J x M
  PathSet source;
  ArrayGeometry rx;
  ArrayGeometry tx;
};

struct NoiseModel {
  double bandwidth_hz = 100e6;
  double psd_dbm_per_hz = -174.0;
  double noise_figure_db = 6.0;
};

/// Array response vector h(theta, phi); every entry has unit modulus.
inline CVector upa_response(const ArrayGeometry& g, double theta, double phi) {
  g.validate();
  const Index side = g.side();
  const double k = 2.0 * kPi * g.element_spacing / g.wavelength;
  const double uy = std::cos(theta) * std::sin(phi);
  const double uz = std::sin(theta);
  CVector h(g.num_elements);
  for (Index mz = 0; mz < side; ++mz) {
    for (Index my = 0; my < side; ++my) {
      const double phase = k * (static_cast<double>(my) * uy + static_cast<double>(mz) * uz);
      h(g.index(my, mz)) = std::polar(1.0, phase);
    }
  }
  return h;
}

/// M x L matrix whose columns are the transmit responses of each path.
inline CMatrix transmit_responses(const PathSet& ps, const ArrayGeometry& tx) {
  CMatrix ht(tx.num_elements, ps.size());
  for (Index l = 0; l < ps.size(); ++l) {
    const auto& p = ps.paths[static_cast<std::size_t>(l)];
    ht.col(l) = upa_response(tx, p.aod_theta, p.aod_phi);
  }
  return ht;
}

/// Large-scale gain (lambda / (4 pi ell))^eta.
inline double pathloss_gain(double wavelength, double distance, double exponent) {
  return std::pow(wavelength / (4.0 * kPi * distance), exponent);
}

/// SplitMix64 finalizer; maps (base seed, trial) to an independent stream seed.
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) {
  std::uint64_t z = base ^ (0x9E3779B97F4A7C15ull * (trial + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline PathSet sample_paths(std::uint64_t seed, Index num_paths, const AngleRanges& ranges,
                            double distance, double exponent, double wavelength) {
  require(num_paths >= 1, "channel: number of paths must be >= 1");
  require(distance > 0.0, "channel: link distance must be positive");
  require(exponent >= 0.0, "channel: path-loss exponent must be non-negative");
  for (const AngleRange* r : {&ranges.aod_theta, &ranges.aod_phi, &ranges.aoa_theta, &ranges.aoa_phi}) {
    require(r->hi > r->lo, "channel: angle interval must be nonempty");
  }

  std::mt19937_64 rng(seed);
  auto uniform = [&rng](const AngleRange& r) {
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
  };
  // Two real normals of variance 1/2 give CN(0, 1).
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double amplitude = std::sqrt(pathloss_gain(wavelength, distance, exponent));

  PathSet ps;
  ps.distance = distance;
  ps.exponent = exponent;
  ps.paths.reserve(static_cast<std::size_t>(num_paths));
  for (Index l = 0; l < num_paths; ++l) {
    Path p;
    p.aod_theta = uniform(ranges.aod_theta);
    p.aod_phi = uniform(ranges.aod_phi);
    p.aoa_theta = uniform(ranges.aoa_theta);
    p.aoa_phi = uniform(ranges.aoa_phi);
    const double re = normal(rng);
    const double im = normal(rng);
    p.gain = amplitude * cdouble(re, im);
    ps.paths.push_back(p);
  }
  return ps;
}

/// H = (1/sqrt(L)) sum_l h_l h_r(aoa_l) h_t(aod_l)^H.
inline ChannelRealization assemble_channel(const PathSet& ps, const ArrayGeometry& tx,
                                           const ArrayGeometry& rx) {
  require(ps.size() >= 1, "channel: empty path set");
  require(tx.wavelength == rx.wavelength, "channel: transmit and receive wavelengths differ");
  CMatrix h = CMatrix::Zero(rx.num_elements, tx.num_elements);
  for (const auto& p : ps.paths) {
    const CVector hr = upa_response(rx, p.aoa_theta, p.aoa_phi);
    const CVector ht = upa_response(tx, p.aod_theta, p.aod_phi);
    h.noalias() += (p.gain * hr) * ht.adjoint();
  }
  h /= std::sqrt(static_cast<double>(ps.size()));
  return {std::move(h), ps, rx, tx};
}

/// Receiver noise power sigma^2 in mW.
inline double noise_power_mw(const NoiseModel& nm) {
  require(nm.bandwidth_hz > 0.0, "noise: bandwidth must be positive");
  return dbm_to_mw(nm.psd_dbm_per_hz + linear_to_db(nm.bandwidth_hz) + nm.noise_figure_db);
}

namespace detail {
inline void append_bytes(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}
}  // namespace detail

/// Little-endian binary image of a path set; equal sets give equal bytes.
inline std::string serialize(const PathSet& ps) {
  std::string out;
  detail::append_bytes(out, ps.distance);
  detail::append_bytes(out, ps.exponent);
  for (const auto& p : ps.paths) {
    for (double v : {p.gain.real(), p.gain.imag(), p.aod_theta, p.aod_phi, p.aoa_theta, p.aoa_phi}) {
      detail::append_bytes(out, v);
    }
  }
  return out;
}

inline std::string serialize(const ChannelRealization& ch) {
  std::string out = serialize(ch.source);
  for (Index j = 0; j < ch.matrix.cols(); ++j) {
    for (Index i = 0; i < ch.matrix.rows(); ++i) {
      detail::append_bytes(out, ch.matrix(i, j).real());
      detail::append_bytes(out, ch.matrix(i, j).imag());
    }
  }
  return out;
}

}  // namespace irsmimo
