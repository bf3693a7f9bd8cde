#pragma once

// Monte-Carlo harness: scenario construction, seeded parallel trials and aggregation.

#include "irsmimo/channel.hpp"
#include "irsmimo/feed_geometry.hpp"
#include "irsmimo/lens_array.hpp"
#include "irsmimo/power.hpp"
#include "irsmimo/precoders.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace irsmimo {

enum class SurfaceDesign { None, MI, OMP };

/// One evaluated architecture, e.g. "IRS-OMP" or "FC".
struct ArchitectureSpec {
  Architecture architecture = Architecture::FD;
  SurfaceDesign design = SurfaceDesign::None;

  bool uses_surface() const { return architecture == Architecture::IRS || architecture == Architecture::ITS; }

  std::string label() const {
    std::string s(to_string(architecture));
    if (design == SurfaceDesign::MI) s += "-MI";
    if (design == SurfaceDesign::OMP) s += "-OMP";
    return s;
  }

  static ArchitectureSpec parse(const std::string& label) {
    static const std::map<std::string, ArchitectureSpec> table = {
        {"FD", {Architecture::FD, SurfaceDesign::None}},
        {"FC", {Architecture::FC, SurfaceDesign::None}},
        {"PC", {Architecture::PC, SurfaceDesign::None}},
        {"LA", {Architecture::LA, SurfaceDesign::None}},
        {"IRS-OMP", {Architecture::IRS, SurfaceDesign::OMP}},
        {"IRS-MI", {Architecture::IRS, SurfaceDesign::MI}},
        {"ITS-OMP", {Architecture::ITS, SurfaceDesign::OMP}},
        {"ITS-MI", {Architecture::ITS, SurfaceDesign::MI}},
    };
    const auto it = table.find(label);
    if (it == table.end()) throw ConfigError("unknown architecture '" + label + "'");
    return it->second;
  }
};

enum class SweepParam { None, M, N, L, K, RingRadius, FeedDistance };

inline std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::None: return "none";
    case SweepParam::M: return "M";
    case SweepParam::N: return "N";
    case SweepParam::L: return "L";
    case SweepParam::K: return "K";
    case SweepParam::RingRadius: return "ring_radius_d";
    case SweepParam::FeedDistance: return "feed_distance_r0";
  }
  return "?";
}

inline SweepParam parse_sweep_param(const std::string& s) {
  for (auto p : {SweepParam::None, SweepParam::M, SweepParam::N, SweepParam::L, SweepParam::K,
                 SweepParam::RingRadius, SweepParam::FeedDistance}) {
    if (s == to_string(p)) return p;
  }
  throw ConfigError("unknown sweep parameter '" + s + "'");
}

enum class SpilloverSource { Discrete, ClosedForm };

struct ExperimentConfig {
  std::vector<std::string> architectures{"FD", "FC", "PC", "LA", "IRS-OMP", "IRS-MI", "ITS-OMP", "ITS-MI"};
  std::vector<Illumination> strategies{Illumination::SI};

  Index num_elements = 256;  // M
  Index rf_chains = 4;       // N
  Index streams = 4;         // Q
  Index rx_antennas = 16;    // J
  Index lens_feeds = 64;     // K
  Index num_paths = 8;       // L

  double wavelength = 0.01;
  double spacing_wavelengths = 0.5;  // d / lambda
  double link_distance = 100.0;
  double pathloss_exponent = 2.0;
  AngleRanges angles;

  double feed_exponent = 49.0;
  std::optional<double> ring_radius_d;       // R_r / d; default from the strategy's scaling rule
  std::optional<double> feed_distance_r0;    // R_d / R_0 with R_0 = d sqrt(M / (pi N))
  SpilloverSource spillover = SpilloverSource::Discrete;
  PaPowerMode pa_mode = PaPowerMode::Approximate;
  double la_max_steer_deg = 80.0;

  PowerModelParams power;
  NoiseModel noise;

  Index trials = 1000;
  std::uint64_t base_seed = 1;
  unsigned workers = 0;  // 0 = hardware concurrency

  SweepParam sweep = SweepParam::None;
  std::vector<double> sweep_values;

  double element_spacing() const { return spacing_wavelengths * wavelength; }
  double snr() const { return power.tx_mw / noise_power_mw(noise); }

  std::vector<ArchitectureSpec> architecture_specs() const {
    std::vector<ArchitectureSpec> out;
    for (const auto& a : architectures) out.push_back(ArchitectureSpec::parse(a));
    return out;
  }

  void validate() const {
    require(!architectures.empty(), "experiment: no architectures");
    const auto specs = architecture_specs();
    const bool any_surface = std::any_of(specs.begin(), specs.end(), [](const auto& s) { return s.uses_surface(); });
    require(!any_surface || !strategies.empty(), "experiment: surface architectures need a strategy");
    require(exact_sqrt(num_elements) > 0, "experiment: M must be a perfect square");
    require(rf_chains >= 1 && streams >= 1 && rx_antennas >= 1 && num_paths >= 1 && lens_feeds >= 1,
            "experiment: dimensions must be >= 1");
    require(streams <= rf_chains, "experiment: Q must not exceed N");
    require(rf_chains <= num_elements, "experiment: N must not exceed M");
    require(streams <= rx_antennas, "experiment: Q must not exceed J");
    require(trials >= 1, "experiment: trials must be >= 1");
    require(wavelength > 0.0 && spacing_wavelengths > 0.0, "experiment: wavelength and spacing must be positive");
    require(feed_exponent >= 2.0, "experiment: kappa must be >= 2");
    require(!ring_radius_d || *ring_radius_d >= 0.0, "experiment: ring_radius_d must be non-negative");
    require(!feed_distance_r0 || *feed_distance_r0 > 0.0, "experiment: feed_distance_r0 must be positive");
    require(la_max_steer_deg > 0.0 && la_max_steer_deg < 90.0, "experiment: la_max_steer_deg must lie in (0, 90)");
    require(sweep == SweepParam::None || !sweep_values.empty(), "experiment: sweep needs values");
    power.validate();
  }

  /// Copy with the sweep parameter set to v.
  ExperimentConfig at(double v) const {
    ExperimentConfig c = *this;
    auto as_count = [v](const char* what) {
      const auto i = static_cast<Index>(std::llround(v));
      require(std::abs(v - static_cast<double>(i)) < 1e-9 && i >= 1,
              std::string("sweep: ") + what + " values must be positive integers");
      return i;
    };
    switch (sweep) {
      case SweepParam::None: break;
      case SweepParam::M: c.num_elements = as_count("M"); break;
      case SweepParam::N: c.rf_chains = as_count("N"); break;
      case SweepParam::L: c.num_paths = as_count("L"); break;
      case SweepParam::K: c.lens_feeds = as_count("K"); break;
      case SweepParam::RingRadius: c.ring_radius_d = v; break;
      case SweepParam::FeedDistance: c.feed_distance_r0 = v; break;
    }
    return c;
  }

  std::vector<double> effective_sweep_values() const {
    return sweep == SweepParam::None ? std::vector<double>{0.0} : sweep_values;
  }
};

/// R_0 = d sqrt(M / (pi N)).
inline double reference_distance(const ExperimentConfig& c) {
  return c.element_spacing() *
         std::sqrt(static_cast<double>(c.num_elements) / (kPi * static_cast<double>(c.rf_chains)));
}

inline IlluminationConfig illumination_for(const ExperimentConfig& c, Illumination s, double efficiency) {
  const ArrayGeometry surface(c.num_elements, c.element_spacing(), c.wavelength);
  auto ic = IlluminationConfig::with_default_scaling(s, c.rf_chains, surface, c.feed_exponent, efficiency);
  if (c.ring_radius_d) ic.ring_radius = *c.ring_radius_d * c.element_spacing();
  if (c.feed_distance_r0) ic.feed_distance = *c.feed_distance_r0 * reference_distance(c);
  return ic;
}

/// Spillover efficiency charged to the feeds: mean discrete capture or the circular closed form.
inline double scenario_spillover(const ExperimentConfig& c, const TransferMatrix& t) {
  if (c.spillover == SpilloverSource::Discrete) return discrete_spillover(t).mean();
  const bool whole = t.config.strategy == Illumination::FI || t.config.strategy == Illumination::BlockageFreePI;
  const double area = static_cast<double>(c.num_elements) / (whole ? 1.0 : static_cast<double>(c.rf_chains));
  return spillover_efficiency(c.feed_exponent, angular_extent(area, c.element_spacing(), t.config.feed_distance));
}

struct SurfaceScenario {
  ArchitectureSpec spec;
  Illumination strategy = Illumination::SI;
  TransferMatrix transfer;
  double spillover = 1.0;
  double condition = 1.0;
};

/// Everything that is fixed across the trials of one sweep value.
struct Scenario {
  ExperimentConfig config;
  double sweep_value = 0.0;
  double snr = 0.0;
  std::vector<ArchitectureSpec> benchmarks;  // FD, FC, PC, LA
  std::vector<SurfaceScenario> surfaces;
  std::optional<LensArray> lens;
  std::vector<std::vector<Index>> pc_partition;
};

inline Scenario build_scenario(const ExperimentConfig& base, double sweep_value) {
  Scenario sc;
  sc.config = base.at(sweep_value);
  const auto& c = sc.config;
  c.validate();
  sc.sweep_value = sweep_value;
  sc.snr = c.snr();
  const ArrayGeometry array(c.num_elements, c.element_spacing(), c.wavelength);
  for (const auto& spec : c.architecture_specs()) {
    if (!spec.uses_surface()) {
      sc.benchmarks.push_back(spec);
      if (spec.architecture == Architecture::PC && sc.pc_partition.empty()) {
        sc.pc_partition = surface_partition(array, c.rf_chains);
      }
      if (spec.architecture == Architecture::LA && !sc.lens) {
        LensConfig lc;
        lc.lens = array;
        lc.num_feeds = c.lens_feeds;
        lc.feed_exponent = c.feed_exponent;
        lc.surface_efficiency = surface_efficiency(Architecture::LA, c.power);
        lc.max_steer_rad = c.la_max_steer_deg * kPi / 180.0;
        require(c.rf_chains <= c.lens_feeds, "experiment: LA needs N <= K");
        sc.lens = build_lens_array(lc);
      }
      continue;
    }
    for (Illumination s : c.strategies) {
      SurfaceScenario ss;
      ss.spec = spec;
      ss.strategy = s;
      ss.transfer = build_transfer_matrix(illumination_for(c, s, surface_efficiency(spec.architecture, c.power)));
      ss.spillover = scenario_spillover(c, ss.transfer);
      ss.condition = condition_number(ss.transfer);
      sc.surfaces.push_back(std::move(ss));
    }
  }
  return sc;
}

struct TrialRecord {
  std::string architecture;
  std::string strategy;  // "none" for architectures without a surface
  double sweep_value = 0.0;
  Index trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double rate = 0.0;
  double total_power_mw = 0.0;
  double energy_efficiency = 0.0;  // bits / joule
  double bnorm_sq = 0.0;
  double condition = std::numeric_limits<double>::quiet_NaN();
  unsigned flags = kNone;
  std::string error;
};

namespace detail {

inline TrialRecord make_record(const Scenario& sc, const std::string& label, const std::string& strategy,
                               Index trial, std::uint64_t seed) {
  TrialRecord r;
  r.architecture = label;
  r.strategy = strategy;
  r.sweep_value = sc.sweep_value;
  r.trial = trial;
  r.seed = seed;
  return r;
}

inline void fill_outcome(TrialRecord& r, const ExperimentConfig& c, const CMatrix& h, const Precoder& p,
                         double gamma, double power_mw) {
  r.rate = rate(h, p.effective, gamma);
  r.total_power_mw = power_mw;
  r.energy_efficiency = c.noise.bandwidth_hz * r.rate / (power_mw * 1e-3);
  r.bnorm_sq = p.baseband_power();
  r.flags = p.flags;
  r.ok = true;
}

template <class Fn>
void guarded(TrialRecord& r, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
}

}  // namespace detail

/// All records for one trial of one scenario. Module failures mark the record failed.
inline std::vector<TrialRecord> run_trial(const Scenario& sc, Index trial) {
  const auto& c = sc.config;
  const std::uint64_t seed = trial_seed(c.base_seed, static_cast<std::uint64_t>(trial));
  const ArrayGeometry tx(c.num_elements, c.element_spacing(), c.wavelength);
  const ArrayGeometry rx(c.rx_antennas, c.element_spacing(), c.wavelength);
  const PathSet paths = sample_paths(seed, c.num_paths, c.angles, c.link_distance, c.pathloss_exponent, c.wavelength);
  const CMatrix h = assemble_channel(paths, tx, rx).matrix;
  const CMatrix ht = transmit_responses(paths, tx);
  const double gamma = sc.snr;

  std::vector<TrialRecord> out;
  std::optional<CMatrix> f_opt;
  try {
    f_opt = fd_optimal(h, gamma, c.streams).effective;
  } catch (const std::exception&) {
    // Every design below depends on it and will report its own failure.
  }

  auto pa_power = [&](Architecture a, double spill, const Precoder& p) {
    return power_surface(a, c.rf_chains, c.power, spill, c.pa_mode, p.baseband_power());
  };

  for (const auto& spec : sc.benchmarks) {
    auto r = detail::make_record(sc, spec.label(), "none", trial, seed);
    detail::guarded(r, [&] {
      switch (spec.architecture) {
        case Architecture::FD: {
          const auto p = fd_optimal(h, gamma, c.streams);
          detail::fill_outcome(r, c, h, p, gamma, power_fd(c.num_elements, c.power));
          break;
        }
        case Architecture::FC: {
          const auto p = fc_sparse_precoder(h, ht, gamma, c.rf_chains, c.streams, f_opt);
          detail::fill_outcome(r, c, h, p, gamma, power_fc(c.num_elements, c.rf_chains, c.power));
          break;
        }
        case Architecture::PC: {
          const auto p = pc_precoder(h, ht, sc.pc_partition, gamma, c.streams, f_opt);
          detail::fill_outcome(r, c, h, p, gamma, power_pc(c.num_elements, c.rf_chains, c.power));
          break;
        }
        case Architecture::LA: {
          const auto p = la_precoder(h, ht, *sc.lens, gamma, c.rf_chains, c.streams, f_opt);
          const double spill = selected_spillover(*sc.lens, p.selected_antennas);
          detail::fill_outcome(r, c, h, p, gamma, pa_power(Architecture::LA, spill, p));
          r.condition = condition_number(CMatrix(p.phases.asDiagonal() * p.analog));
          break;
        }
        default: throw ConfigError("unexpected benchmark architecture");
      }
    });
    out.push_back(std::move(r));
  }

  for (const auto& ss : sc.surfaces) {
    auto r = detail::make_record(sc, ss.spec.label(), std::string(to_string(ss.strategy)), trial, seed);
    detail::guarded(r, [&] {
      const Precoder p = ss.spec.design == SurfaceDesign::MI
                             ? mi_precoder(h, ht, ss.transfer, gamma, c.streams, ss.spec.architecture)
                             : omp_precoder(h, ht, ss.transfer, gamma, c.streams, ss.spec.architecture, f_opt);
      detail::fill_outcome(r, c, h, p, gamma, pa_power(ss.spec.architecture, ss.spillover, p));
      r.condition = ss.condition;
    });
    out.push_back(std::move(r));
  }
  return out;
}

using ProgressLog = std::function<void(const std::string&)>;

/// Every (sweep value, trial) record; identical for any worker count.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, const ProgressLog& log = {}) {
  cfg.validate();
  const auto values = cfg.effective_sweep_values();
  std::vector<Scenario> scenarios;
  scenarios.reserve(values.size());
  for (double v : values) scenarios.push_back(build_scenario(cfg, v));

  const auto trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t jobs = scenarios.size() * trials;
  std::vector<std::vector<TrialRecord>> slots(jobs);
  std::atomic<std::size_t> next{0};
  std::vector<std::size_t> done(scenarios.size(), 0);
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t s = job / trials;
      slots[job] = run_trial(scenarios[s], static_cast<Index>(job % trials));
      if (log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (++done[s] == trials) {
          log("finished " + std::string(to_string(cfg.sweep)) + "=" + std::to_string(scenarios[s].sweep_value) +
              " (" + std::to_string(trials) + " trials)");
        }
      }
    }
  };

  unsigned n_workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, std::max<std::size_t>(jobs, 1)));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }

  std::vector<TrialRecord> records;
  for (auto& slot : slots) {
    for (auto& r : slot) records.push_back(std::move(r));
  }
  return records;
}

struct CellStats {
  Index ok = 0;
  Index failed = 0;
  double mean_rate = 0.0;
  double stderr_rate = 0.0;
  double mean_power_mw = 0.0;
  double mean_ee = 0.0;
  double mean_bnorm_sq = 0.0;
  double mean_condition = std::numeric_limits<double>::quiet_NaN();

  bool empty() const { return ok == 0; }
};

struct SummaryRow {
  std::string architecture;
  std::string strategy;
  Index M = 0, N = 0, Q = 0, J = 0, K = 0, L = 0;
  std::string sweep_param;
  double sweep_value = 0.0;
  CellStats stats;
};

/// Mean and standard error over successful records; failures are counted, never imputed.
inline CellStats summarize(const std::vector<const TrialRecord*>& cell) {
  CellStats s;
  double sum_rate = 0.0, sum_power = 0.0, sum_ee = 0.0, sum_b = 0.0, sum_cond = 0.0;
  Index cond_count = 0;
  for (const auto* r : cell) {
    if (!r->ok) {
      ++s.failed;
      continue;
    }
    ++s.ok;
    sum_rate += r->rate;
    sum_power += r->total_power_mw;
    sum_ee += r->energy_efficiency;
    sum_b += r->bnorm_sq;
    if (!std::isnan(r->condition)) {
      sum_cond += r->condition;
      ++cond_count;
    }
  }
  if (s.ok == 0) return s;
  const double n = static_cast<double>(s.ok);
  s.mean_rate = sum_rate / n;
  s.mean_power_mw = sum_power / n;
  s.mean_ee = sum_ee / n;
  s.mean_bnorm_sq = sum_b / n;
  if (cond_count) s.mean_condition = sum_cond / static_cast<double>(cond_count);
  if (s.ok > 1) {
    double ss = 0.0;
    for (const auto* r : cell) {
      if (r->ok) ss += (r->rate - s.mean_rate) * (r->rate - s.mean_rate);
    }
    s.stderr_rate = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

/// One row per (sweep value, architecture, strategy), in first-appearance order.
inline std::vector<SummaryRow> aggregate(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
  using Key = std::tuple<double, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const TrialRecord*>> cells;
  for (const auto& r : records) {
    Key k{r.sweep_value, r.architecture, r.strategy};
    auto [it, inserted] = cells.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& k : order) {
    const auto c = cfg.at(std::get<0>(k));
    SummaryRow row;
    row.architecture = std::get<1>(k);
    row.strategy = std::get<2>(k);
    row.M = c.num_elements;
    row.N = c.rf_chains;
    row.Q = c.streams;
    row.J = c.rx_antennas;
    row.K = c.lens_feeds;
    row.L = c.num_paths;
    row.sweep_param = std::string(to_string(cfg.sweep));
    row.sweep_value = std::get<0>(k);
    row.stats = summarize(cells[k]);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Condition number of T per strategy across the sweep; no channel trials involved.
inline std::vector<SummaryRow> geometry_sweep(const ExperimentConfig& cfg) {
  require(cfg.sweep == SweepParam::RingRadius || cfg.sweep == SweepParam::FeedDistance,
          "geometry: sweep must be ring_radius_d or feed_distance_r0");
  require(!cfg.strategies.empty(), "geometry: no strategies");
  std::vector<SummaryRow> rows;
  for (double v : cfg.sweep_values) {
    const auto c = cfg.at(v);
    c.validate();
    for (Illumination s : c.strategies) {
      const auto t = build_transfer_matrix(illumination_for(c, s, 1.0));
      SummaryRow row;
      row.architecture = "T";
      row.strategy = std::string(to_string(s));
      row.M = c.num_elements;
      row.N = c.rf_chains;
      row.Q = c.streams;
      row.J = c.rx_antennas;
      row.K = c.lens_feeds;
      row.L = c.num_paths;
      row.sweep_param = std::string(to_string(cfg.sweep));
      row.sweep_value = v;
      row.stats.ok = 1;
      row.stats.mean_condition = condition_number(t);
      row.stats.mean_rate = std::numeric_limits<double>::quiet_NaN();
      row.stats.stderr_rate = std::numeric_limits<double>::quiet_NaN();
      row.stats.mean_power_mw = std::numeric_limits<double>::quiet_NaN();
      row.stats.mean_ee = std::numeric_limits<double>::quiet_NaN();
      row.stats.mean_bnorm_sq = std::numeric_limits<double>::quiet_NaN();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace irsmimo
