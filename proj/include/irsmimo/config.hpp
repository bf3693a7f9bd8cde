#pragma once

// INI configuration: parsing with strict key checking, environment overrides and a
// canonical key=value form used for hashing and CSV round-trips.

#include "irsmimo/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

extern char** environ;

namespace irsmimo {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not a number");
  }
  return v;
}

inline long long parse_integer(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not an integer");
  }
  return v;
}

inline std::uint64_t parse_seed(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not an unsigned integer");
  }
  return v;
}

inline std::optional<double> parse_auto(const std::string& key, const std::string& s) {
  if (trim(s) == "auto") return std::nullopt;
  return parse_double(key, s);
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, double>) {
      out += format_double(items[i]);
    } else if constexpr (std::is_same_v<T, Illumination>) {
      out += to_string(items[i]);
    } else {
      out += items[i];
    }
  }
  return out;
}

}  // namespace detail

/// Sets one "section.key" entry. Power keys ending in _mw also accept a _dbm spelling.
inline void apply_setting(ExperimentConfig& c, const std::string& section, const std::string& key,
                          const std::string& value) {
  using namespace detail;
  const std::string full = section + "." + key;
  auto num = [&] { return parse_double(full, value); };
  auto count = [&] {
    const auto v = parse_integer(full, value);
    require(v >= 0, "config key '" + full + "' must be non-negative");
    return static_cast<Index>(v);
  };
  auto angle = [&](AngleRange& r, bool lo) { (lo ? r.lo : r.hi) = num(); };

  if (section == "experiment") {
    if (key == "architectures") {
      c.architectures = split_list(value);
      for (const auto& a : c.architectures) ArchitectureSpec::parse(a);
    } else if (key == "strategies") {
      c.strategies.clear();
      for (const auto& s : split_list(value)) c.strategies.push_back(parse_illumination(s));
    } else if (key == "trials") {
      c.trials = count();
    } else if (key == "base_seed") {
      c.base_seed = parse_seed(full, value);
    } else if (key == "workers") {
      c.workers = static_cast<unsigned>(count());
    } else if (key == "spillover") {
      const auto v = trim(value);
      if (v == "discrete") {
        c.spillover = SpilloverSource::Discrete;
      } else if (v == "closed_form") {
        c.spillover = SpilloverSource::ClosedForm;
      } else {
        throw ConfigError("config key '" + full + "': expected discrete or closed_form");
      }
    } else if (key == "pa_mode") {
      const auto v = trim(value);
      if (v == "approximate") {
        c.pa_mode = PaPowerMode::Approximate;
      } else if (v == "exact") {
        c.pa_mode = PaPowerMode::Exact;
      } else {
        throw ConfigError("config key '" + full + "': expected approximate or exact");
      }
    } else {
      throw ConfigError("unknown config key '" + full + "'");
    }
  } else if (section == "dimensions") {
    if (key == "M") {
      c.num_elements = count();
    } else if (key == "N") {
      c.rf_chains = count();
    } else if (key == "Q") {
      c.streams = count();
    } else if (key == "J") {
      c.rx_antennas = count();
    } else if (key == "K") {
      c.lens_feeds = count();
    } else if (key == "L") {
      c.num_paths = count();
    } else {
      throw ConfigError("unknown config key '" + full + "'");
    }
  } else if (section == "channel") {
    if (key == "wavelength_m") {
      c.wavelength = num();
    } else if (key == "spacing_wavelengths") {
      c.spacing_wavelengths = num();
    } else if (key == "distance_m") {
      c.link_distance = num();
    } else if (key == "pathloss_exponent") {
      c.pathloss_exponent = num();
    } else if (key == "aod_theta_lo_rad") {
      angle(c.angles.aod_theta, true);
    } else if (key == "aod_theta_hi_rad") {
      angle(c.angles.aod_theta, false);
    } else if (key == "aod_phi_lo_rad") {
      angle(c.angles.aod_phi, true);
    } else if (key == "aod_phi_hi_rad") {
      angle(c.angles.aod_phi, false);
    } else if (key == "aoa_theta_lo_rad") {
      angle(c.angles.aoa_theta, true);
    } else if (key == "aoa_theta_hi_rad") {
      angle(c.angles.aoa_theta, false);
    } else if (key == "aoa_phi_lo_rad") {
      angle(c.angles.aoa_phi, true);
    } else if (key == "aoa_phi_hi_rad") {
      angle(c.angles.aoa_phi, false);
    } else {
      throw ConfigError("unknown config key '" + full + "'");
    }
  } else if (section == "geometry") {
    if (key == "feed_exponent") {
      c.feed_exponent = num();
    } else if (key == "ring_radius_d") {
      c.ring_radius_d = parse_auto(full, value);
    } else if (key == "feed_distance_r0") {
      c.feed_distance_r0 = parse_auto(full, value);
    } else if (key == "la_max_steer_deg") {
      c.la_max_steer_deg = num();
    } else {
      throw ConfigError("unknown config key '" + full + "'");
    }
  } else if (section == "power") {
    auto& p = c.power;
    auto mw = [&](const std::string& stem, double& target) {
      if (key == stem + "_mw") {
        target = num();
        return true;
      }
      if (key == stem + "_dbm") {
        target = dbm_to_mw(num());
        return true;
      }
      return false;
    };
    if (mw("baseband", p.baseband_mw) || mw("rf_chain", p.rf_chain_mw) || mw("switch", p.switch_mw) ||
        mw("amplifier", p.amplifier_mw) || mw("tx", p.tx_mw)) {
      return;
    }
    if (key == "amplifier_gain_db") {
      p.amplifier_gain_db = num();
    } else if (key == "divider_loss_db") {
      p.divider_loss_db = num();
    } else if (key == "combiner_loss_db") {
      p.combiner_loss_db = num();
    } else if (key == "phase_shifter_loss_db") {
      p.phase_shifter_loss_db = num();
    } else if (key == "aperture_loss_irs_db") {
      p.aperture_loss_irs_db = num();
    } else if (key == "aperture_loss_its_db") {
      p.aperture_loss_its_db = num();
    } else if (key == "pa_efficiency") {
      p.pa_efficiency = num();
    } else {
      throw ConfigError("unknown config key '" + full + "'");
    }
  } else if (section == "noise") {
    if (key == "bandwidth_hz") {
      c.noise.bandwidth_hz = num();
    } else if (key == "psd_dbm_per_hz") {
      c.noise.psd_dbm_per_hz = num();
    } else if (key == "noise_figure_db") {
      c.noise.noise_figure_db = num();
    } else {
      throw ConfigError("unknown config key '" + full + "'");
    }
  } else if (section == "sweep") {
    if (key == "param") {
      c.sweep = parse_sweep_param(trim(value));
    } else if (key == "values") {
      c.sweep_values.clear();
      for (const auto& v : split_list(value)) c.sweep_values.push_back(parse_double(full, v));
    } else {
      throw ConfigError("unknown config key '" + full + "'");
    }
  } else {
    throw ConfigError("unknown config section '" + section + "'");
  }
}

/// Applies every entry of an INI stream on top of c.
inline void apply_ini(ExperimentConfig& c, std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config key '" + section + "' outside a section");
    }
    for (const auto& [key, leaf] : body) apply_setting(c, section, key, leaf.data());
  }
}

inline ExperimentConfig parse_ini(std::istream& in) {
  ExperimentConfig c;
  apply_ini(c, in);
  return c;
}

inline constexpr const char* kEnvPrefix = "IRSMIMO__";

/// Applies IRSMIMO__<section>__<key>=value variables from the given environment block.
inline void apply_environment(ExperimentConfig& c, char** env = environ) {
  if (!env) return;
  const std::string prefix = kEnvPrefix;
  for (char** e = env; *e; ++e) {
    const std::string entry = *e;
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(prefix.size(), eq - prefix.size());
    const auto sep = name.find("__");
    if (sep == std::string::npos) throw ConfigError("environment override '" + name + "' lacks __key");
    apply_setting(c, name.substr(0, sep), name.substr(sep + 2), entry.substr(eq + 1));
  }
}

/// Canonical (section, key, value) list covering every field.
inline std::vector<std::pair<std::string, std::string>> canonical_settings(const ExperimentConfig& c) {
  using detail::format_double;
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("auto"); };
  const auto& p = c.power;
  const auto& a = c.angles;
  return {
      {"experiment.architectures", detail::join(c.architectures)},
      {"experiment.strategies", detail::join(c.strategies)},
      {"experiment.trials", std::to_string(c.trials)},
      {"experiment.base_seed", std::to_string(c.base_seed)},
      {"experiment.workers", std::to_string(c.workers)},
      {"experiment.spillover", c.spillover == SpilloverSource::Discrete ? "discrete" : "closed_form"},
      {"experiment.pa_mode", c.pa_mode == PaPowerMode::Approximate ? "approximate" : "exact"},
      {"dimensions.M", std::to_string(c.num_elements)},
      {"dimensions.N", std::to_string(c.rf_chains)},
      {"dimensions.Q", std::to_string(c.streams)},
      {"dimensions.J", std::to_string(c.rx_antennas)},
      {"dimensions.K", std::to_string(c.lens_feeds)},
      {"dimensions.L", std::to_string(c.num_paths)},
      {"channel.wavelength_m", format_double(c.wavelength)},
      {"channel.spacing_wavelengths", format_double(c.spacing_wavelengths)},
      {"channel.distance_m", format_double(c.link_distance)},
      {"channel.pathloss_exponent", format_double(c.pathloss_exponent)},
      {"channel.aod_theta_lo_rad", format_double(a.aod_theta.lo)},
      {"channel.aod_theta_hi_rad", format_double(a.aod_theta.hi)},
      {"channel.aod_phi_lo_rad", format_double(a.aod_phi.lo)},
      {"channel.aod_phi_hi_rad", format_double(a.aod_phi.hi)},
      {"channel.aoa_theta_lo_rad", format_double(a.aoa_theta.lo)},
      {"channel.aoa_theta_hi_rad", format_double(a.aoa_theta.hi)},
      {"channel.aoa_phi_lo_rad", format_double(a.aoa_phi.lo)},
      {"channel.aoa_phi_hi_rad", format_double(a.aoa_phi.hi)},
      {"geometry.feed_exponent", format_double(c.feed_exponent)},
      {"geometry.ring_radius_d", opt(c.ring_radius_d)},
      {"geometry.feed_distance_r0", opt(c.feed_distance_r0)},
      {"geometry.la_max_steer_deg", format_double(c.la_max_steer_deg)},
      {"power.baseband_mw", format_double(p.baseband_mw)},
      {"power.rf_chain_mw", format_double(p.rf_chain_mw)},
      {"power.switch_mw", format_double(p.switch_mw)},
      {"power.amplifier_mw", format_double(p.amplifier_mw)},
      {"power.tx_mw", format_double(p.tx_mw)},
      {"power.amplifier_gain_db", format_double(p.amplifier_gain_db)},
      {"power.divider_loss_db", format_double(p.divider_loss_db)},
      {"power.combiner_loss_db", format_double(p.combiner_loss_db)},
      {"power.phase_shifter_loss_db", format_double(p.phase_shifter_loss_db)},
      {"power.aperture_loss_irs_db", format_double(p.aperture_loss_irs_db)},
      {"power.aperture_loss_its_db", format_double(p.aperture_loss_its_db)},
      {"power.pa_efficiency", format_double(p.pa_efficiency)},
      {"noise.bandwidth_hz", format_double(c.noise.bandwidth_hz)},
      {"noise.psd_dbm_per_hz", format_double(c.noise.psd_dbm_per_hz)},
      {"noise.noise_figure_db", format_double(c.noise.noise_figure_db)},
      {"sweep.param", std::string(to_string(c.sweep))},
      {"sweep.values", detail::join(c.sweep_values)},
  };
}

inline std::string canonical_string(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [k, v] : canonical_settings(c)) out += k + "=" + v + "\n";
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Hash of the canonical form; the worker count does not change results and is left out.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  ExperimentConfig copy = c;
  copy.workers = 0;
  return fnv1a(canonical_string(copy));
}

/// Rebuilds a configuration from "section.key=value" lines (e.g. CSV metadata).
inline ExperimentConfig parse_canonical(const std::vector<std::string>& lines) {
  ExperimentConfig c;
  for (const auto& raw : lines) {
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto dot = line.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("malformed canonical setting '" + line + "'");
    }
    apply_setting(c, line.substr(0, dot), line.substr(dot + 1, eq - dot - 1), line.substr(eq + 1));
  }
  return c;
}

}  // namespace irsmimo
