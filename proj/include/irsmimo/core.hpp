#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace irsmimo {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;

/// Raised for invalid scenario parameters (bad dimensions, out-of-range values, unknown keys).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a numerical routine has no meaningful answer for its input.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// dB helpers; all internal arithmetic is linear.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }
inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }
inline double mw_to_dbm(double mw) { return linear_to_db(mw); }

/// Integer square root of a perfect square, or -1 otherwise.
inline Index exact_sqrt(Index n) {
  if (n < 0) return -1;
  auto r = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n ? r : -1;
}

/// Diagnostic bits attached to designed precoders and trial records.
enum DiagnosticFlag : unsigned {
  kNone = 0,
  kSingularNormalMatrix = 1u << 0,  // C^H C was rank deficient and pseudo-inverted
  kDuplicateSelection = 1u << 1,    // LA: two RF chains picked the same antenna
  kDegenerateResidual = 1u << 2,    // least-squares fit had zero norm
};

}  // namespace irsmimo
