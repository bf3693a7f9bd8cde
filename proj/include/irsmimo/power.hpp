#pragma once

// Total consumed power for each transmitter architecture (mW).

#include "irsmimo/core.hpp"
#include "irsmimo/precoders.hpp"

#include <optional>

namespace irsmimo {

struct PowerModelParams {
  double baseband_mw = 200.0;        // P_bb
  double rf_chain_mw = 100.0;        // P_rfc
  double switch_mw = 5.0;            // P_sw
  double amplifier_mw = 40.0;        // P_amp, per gain-compensation amplifier
  double tx_mw = 100.0;              // P_tx, radiated by the array / surface
  double amplifier_gain_db = 10.0;   // G_amp
  double divider_loss_db = 3.6;      // L_D, per two-port stage
  double combiner_loss_db = 3.6;     // L_C, per two-port stage
  double phase_shifter_loss_db = 2.0;  // L_P
  double aperture_loss_irs_db = 0.5;
  double aperture_loss_its_db = 1.5;
  double pa_efficiency = 0.3;        // rho_pa

  void validate() const {
    for (double v : {baseband_mw, rf_chain_mw, switch_mw, amplifier_mw, tx_mw}) {
      require(v >= 0.0, "power: powers must be non-negative");
    }
    require(amplifier_gain_db > 0.0, "power: amplifier gain must be positive");
    for (double v : {divider_loss_db, combiner_loss_db, phase_shifter_loss_db, aperture_loss_irs_db,
                     aperture_loss_its_db}) {
      require(v >= 0.0, "power: losses must be non-negative dB");
    }
    require(pa_efficiency > 0.0 && pa_efficiency <= 1.0, "power: PA efficiency must lie in (0, 1]");
  }

  double phase_shifter_efficiency() const { return db_to_linear(-phase_shifter_loss_db); }
};

inline double power_fd(Index m, const PowerModelParams& p) {
  p.validate();
  return p.baseband_mw + static_cast<double>(m) * p.rf_chain_mw + p.tx_mw / p.pa_efficiency;
}

namespace detail {
inline double ceil_log2(Index v) {
  return v <= 1 ? 0.0 : std::ceil(std::log2(static_cast<double>(v)) - 1e-12);
}
// Number of gain-compensation amplifiers per antenna; the tolerance keeps exact multiples exact.
inline double amplifier_count(double loss_db, double gain_db) {
  return std::max(0.0, std::ceil(loss_db / gain_db - 1e-9));
}
}  // namespace detail

/// RF feed-network loss of the FC network in dB.
inline double fc_network_loss_db(Index m, Index n, const PowerModelParams& p) {
  return detail::ceil_log2(m) * p.divider_loss_db + detail::ceil_log2(n) * p.combiner_loss_db +
         p.phase_shifter_loss_db;
}

/// RF feed-network loss of the PC network in dB.
inline double pc_network_loss_db(Index m, Index n, const PowerModelParams& p) {
  require(n >= 1 && m % n == 0, "power_pc: N must divide M");
  return detail::ceil_log2(m / n) * p.divider_loss_db + p.phase_shifter_loss_db;
}

inline double power_fc(Index m, Index n, const PowerModelParams& p) {
  p.validate();
  require(m >= 1 && n >= 1, "power_fc: M and N must be >= 1");
  const double gca = detail::amplifier_count(fc_network_loss_db(m, n, p), p.amplifier_gain_db);
  return p.baseband_mw + static_cast<double>(n) * p.rf_chain_mw +
         gca * static_cast<double>(m) * p.amplifier_mw + p.tx_mw / p.pa_efficiency;
}

inline double power_pc(Index m, Index n, const PowerModelParams& p) {
  p.validate();
  require(m >= 1, "power_pc: M must be >= 1");
  const double gca = detail::amplifier_count(pc_network_loss_db(m, n, p), p.amplifier_gain_db);
  return p.baseband_mw + static_cast<double>(n) * p.rf_chain_mw +
         gca * static_cast<double>(m) * p.amplifier_mw + p.tx_mw / p.pa_efficiency;
}

/// Surface efficiency rho_srf: two phase-shifter passes for IRS, one for ITS and LA.
inline double surface_efficiency(Architecture a, const PowerModelParams& p) {
  const double rp = p.phase_shifter_efficiency();
  switch (a) {
    case Architecture::IRS: return rp * rp * db_to_linear(-p.aperture_loss_irs_db);
    case Architecture::ITS:
    case Architecture::LA: return rp * db_to_linear(-p.aperture_loss_its_db);
    default: throw ConfigError("surface_efficiency: not a surface architecture");
  }
}

enum class PaPowerMode { Approximate, Exact };

/// Surface-aided (IRS, ITS) and LA power. Approximate mode charges P_tx / (rho_S rho_srf rho_pa);
/// exact mode charges P_tx ||B||^2 / rho_pa and requires the baseband power.
inline double power_surface(Architecture a, Index n, const PowerModelParams& p, double spillover,
                            PaPowerMode mode = PaPowerMode::Approximate,
                            std::optional<double> bnorm_sq = std::nullopt) {
  p.validate();
  require(a == Architecture::IRS || a == Architecture::ITS || a == Architecture::LA,
          "power_surface: architecture must be IRS, ITS or LA");
  require(n >= 1, "power_surface: N must be >= 1");
  require(spillover > 0.0 && spillover <= 1.0, "power_surface: spillover efficiency must lie in (0, 1]");
  double pa = 0.0;
  if (mode == PaPowerMode::Exact) {
    if (!bnorm_sq) throw ConfigError("power_surface: exact mode needs ||B||_F^2");
    pa = p.tx_mw * *bnorm_sq / p.pa_efficiency;
  } else {
    pa = p.tx_mw / (spillover * surface_efficiency(a, p) * p.pa_efficiency);
  }
  const double switches = a == Architecture::LA ? static_cast<double>(n) * p.switch_mw : 0.0;
  return p.baseband_mw + static_cast<double>(n) * p.rf_chain_mw + switches + pa;
}

}  // namespace irsmimo
