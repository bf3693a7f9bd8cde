#include "irsmimo/irsmimo.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace irsmimo;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::optional<Index> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::vector<std::string> archs;
  std::vector<std::string> strategies;
  std::vector<std::string> settings;  // section.key=value
  std::vector<double> values;
  bool quiet = false;
};

void add_common(CLI::App* app, CommonOptions& o, bool sweep_values) {
  app->add_option("--config", o.config_path, "INI configuration file (defaults built in)");
  app->add_option("--out", o.out_path, "output CSV path (default: stdout)");
  app->add_option("--trials", o.trials, "Monte-Carlo trials per sweep value");
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  app->add_option("--arch", o.archs, "architectures, e.g. FD,FC,PC,LA,IRS-OMP,ITS-MI")->delimiter(',');
  app->add_option("--strategy", o.strategies, "illumination strategies: FI,PI,SI,BFPI,USI")->delimiter(',');
  app->add_option("--set", o.settings, "override one key: section.key=value (repeatable)");
  if (sweep_values) app->add_option("--values", o.values, "sweep values")->delimiter(',');
  app->add_flag("-q,--quiet", o.quiet, "no progress log on stderr");
}

ExperimentConfig load_config(const CommonOptions& o) {
  ExperimentConfig c;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw IoError("cannot read config file '" + o.config_path + "'");
    apply_ini(c, in);
  }
  apply_environment(c);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    const auto dot = s.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("--set expects section.key=value, got '" + s + "'");
    }
    apply_setting(c, s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
  if (o.trials) c.trials = *o.trials;
  if (o.seed) c.base_seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (!o.archs.empty()) c.architectures = o.archs;
  if (!o.strategies.empty()) {
    c.strategies.clear();
    for (const auto& s : o.strategies) c.strategies.push_back(parse_illumination(s));
  }
  return c;
}

void emit(const CommonOptions& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  std::ofstream out(o.out_path, std::ios::binary);
  if (!out) throw IoError("cannot open output '" + o.out_path + "'");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + o.out_path + "'");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output '" + path + "'");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

ProgressLog progress(const CommonOptions& o) {
  if (o.quiet) return {};
  return [](const std::string& line) { std::cerr << "[irsmimo] " << line << '\n'; };
}

std::string render(const ExperimentConfig& c, const std::string& command, const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  write_metadata(os, c, command, utc_timestamp());
  write_rows(os, rows);
  return os.str();
}

void run_sweep(const CommonOptions& o, SweepParam param, const std::vector<double>& defaults,
               const std::vector<std::string>& default_archs, const std::string& command) {
  ExperimentConfig c = load_config(o);
  if (o.archs.empty() && !default_archs.empty()) c.architectures = default_archs;
  if (c.sweep != param || c.sweep_values.empty()) c.sweep_values = defaults;
  c.sweep = param;
  if (!o.values.empty()) c.sweep_values = o.values;
  c.validate();
  const auto records = run_experiment(c, progress(o));
  emit(o, render(c, command, aggregate(c, records)));
}

std::string records_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << "architecture,strategy,sweep_value,trial,seed,ok,rate_bpshz,ptot_mw,ee_bits_per_joule,bnorm_sq,cond_T,"
        "flags,error\n";
  for (const auto& r : records) {
    os << r.architecture << ',' << r.strategy << ',' << format_cell(r.sweep_value) << ',' << r.trial << ','
       << r.seed << ',' << (r.ok ? 1 : 0) << ',' << (r.ok ? format_cell(r.rate) : "") << ','
       << (r.ok ? format_cell(r.total_power_mw) : "") << ',' << (r.ok ? format_cell(r.energy_efficiency) : "")
       << ',' << (r.ok ? format_cell(r.bnorm_sq) : "") << ',' << format_cell(r.condition) << ',' << r.flags << ','
       << '"' << r.error << '"' << '\n';
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS/ITS-aided mmWave massive MIMO simulator"};
  app.set_version_flag("--version", std::string("irsmimo ") + kToolVersion);
  app.require_subcommand(1);

  CommonOptions m_opts, l_opts, k_opts, g_opts, s_opts;
  auto* sweep_m = app.add_subcommand("sweep-m", "rate, power and energy efficiency versus M");
  add_common(sweep_m, m_opts, true);
  auto* sweep_l = app.add_subcommand("sweep-l", "rate versus the number of channel paths L");
  add_common(sweep_l, l_opts, true);
  auto* sweep_k = app.add_subcommand("sweep-k", "rate versus the number of lens feeds K");
  add_common(sweep_k, k_opts, true);

  auto* geometry = app.add_subcommand("geometry", "condition number of T versus ring radius or feed distance");
  add_common(geometry, g_opts, true);
  std::string geo_param = "ring_radius_d";
  std::optional<double> geo_fixed;
  geometry->add_option("--param", geo_param, "ring_radius_d (multiples of d) or feed_distance_r0 (multiples of R_0)")
      ->check(CLI::IsMember({"ring_radius_d", "feed_distance_r0"}));
  geometry->add_option("--fixed", geo_fixed,
                       "value of the other parameter (default: R_d = 4 R_0, or R_r = 2 d)");

  auto* single = app.add_subcommand("single", "one scenario with per-trial diagnostics");
  add_common(single, s_opts, false);
  std::string records_path;
  std::string geometry_dump;
  single->add_option("--records", records_path, "also write per-trial records to this CSV");
  single->add_option("--dump-geometry", geometry_dump, "write n,m,r,theta,|T| of the first surface scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sweep_m) {
      run_sweep(m_opts, SweepParam::M, {64, 256, 1024, 4096}, {}, "sweep-m");
    } else if (*sweep_l) {
      run_sweep(l_opts, SweepParam::L, {2, 4, 6, 8, 10, 12, 14, 16, 18, 20}, {"FD", "IRS-OMP", "ITS-OMP"},
                "sweep-l");
    } else if (*sweep_k) {
      run_sweep(k_opts, SweepParam::K, {16, 32, 64, 120, 180, 256}, {"FD", "LA", "ITS-OMP"}, "sweep-k");
    } else if (*geometry) {
      ExperimentConfig c = load_config(g_opts);
      if (g_opts.strategies.empty()) {
        c.strategies = {Illumination::FI, Illumination::PI, Illumination::SI, Illumination::BlockageFreePI,
                        Illumination::UniformSI};
      }
      c.sweep = parse_sweep_param(geo_param);
      if (c.sweep == SweepParam::RingRadius) {
        c.feed_distance_r0 = geo_fixed.value_or(4.0);
        c.sweep_values = {0.5, 1, 2, 4, 8, 16};
      } else {
        c.ring_radius_d = geo_fixed.value_or(2.0);
        c.sweep_values = {1, 2, 4, 8, 16, 32};
      }
      if (!g_opts.values.empty()) c.sweep_values = g_opts.values;
      emit(g_opts, render(c, "geometry", geometry_sweep(c)));
    } else if (*single) {
      ExperimentConfig c = load_config(s_opts);
      c.sweep = SweepParam::None;
      c.sweep_values.clear();
      c.validate();
      if (!geometry_dump.empty()) {
        const auto sc = build_scenario(c, 0.0);
        require(!sc.surfaces.empty(), "--dump-geometry needs a surface architecture");
        std::ostringstream os;
        write_geometry_csv(os, sc.surfaces.front().transfer);
        write_file(geometry_dump, os.str());
      }
      const auto records = run_experiment(c, progress(s_opts));
      if (!records_path.empty()) write_file(records_path, records_csv(records));
      emit(s_opts, render(c, "single", aggregate(c, records)));
    }
  } catch (const ConfigError& e) {
    std::cerr << "irsmimo: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "irsmimo: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "irsmimo: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
