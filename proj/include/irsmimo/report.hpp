#pragma once

// CSV output of aggregated results and the metadata block that precedes it.

#include "irsmimo/config.hpp"
#include "irsmimo/experiments.hpp"

#include <cstdio>
#include <ctime>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace irsmimo {

inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr const char* kCsvHeader =
    "architecture,strategy,M,N,Q,J,K,L,sweep_param,sweep_value,trials_ok,trials_failed,"
    "mean_rate_bpshz,stderr_rate,mean_ptot_mw,mean_ee_bits_per_joule,mean_bnorm_sq,mean_cond_T";

/// 9 significant digits; non-finite and empty cells print as nothing.
inline std::string format_cell(double v) {
  if (!std::isfinite(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// "# key: value" lines, then the full configuration as "#! section.key=value" lines.
inline void write_metadata(std::ostream& os, const ExperimentConfig& cfg, const std::string& command,
                           const std::string& timestamp) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  os << "# tool: irsmimo " << kToolVersion << '\n';
  os << "# command: " << command << '\n';
  os << "# config_hash: " << hash << '\n';
  os << "# base_seed: " << cfg.base_seed << '\n';
  if (!timestamp.empty()) os << "# timestamp: " << timestamp << '\n';
  for (const auto& [k, v] : canonical_settings(cfg)) os << "#! " << k << '=' << v << '\n';
}

inline void write_rows(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& s = r.stats;
    const bool empty = s.empty();
    auto cell = [empty](double v) { return empty ? std::string() : format_cell(v); };
    os << r.architecture << ',' << r.strategy << ',' << r.M << ',' << r.N << ',' << r.Q << ',' << r.J << ','
       << r.K << ',' << r.L << ',' << r.sweep_param << ',' << format_cell(r.sweep_value) << ',' << s.ok << ','
       << s.failed << ',' << cell(s.mean_rate) << ',' << cell(s.stderr_rate) << ',' << cell(s.mean_power_mw)
       << ',' << cell(s.mean_ee) << ',' << cell(s.mean_bnorm_sq) << ',' << cell(s.mean_condition) << '\n';
  }
}

/// Configuration stored in the "#! " metadata lines of a CSV file.
inline ExperimentConfig read_metadata_config(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#! ", 0) == 0) lines.push_back(line.substr(3));
  }
  if (lines.empty()) throw ConfigError("no configuration metadata found");
  return parse_canonical(lines);
}

}  // namespace irsmimo
