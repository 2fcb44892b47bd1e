#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcs/analysis.hpp"
#include "bcs/kernel.hpp"
#include "bcs/partition.hpp"
#include "bcs/recovery.hpp"
#include "bcs/rng.hpp"
#include "bcs/sensing.hpp"
#include "bcs/serialize.hpp"
#include "bcs/signals.hpp"
#include "bcs/stats.hpp"

namespace bcs {

struct SolverSettings {
  // Stop a block's pursuit once ||r|| <= factor * sigma * sqrt(m_b). The
  // margin is deliberately loose: a block whose measurement energy is
  // statistically indistinguishable from noise is left unreconstructed
  // rather than letting either solver fit the noise floor, which is what
  // pins both methods to NMSE ~= 1 in the 0 dB regime.
  double residual_tol_factor = 2.5;
  double logit_scale = 1.0;
  double prior_clip = 1e-3;
  // Per-block atom budget: ceil(iter_budget_factor * s_avg / beta).
  double iter_budget_factor = 1.5;
};

/// Full description of a benchmark run. The master seed drives disjoint
/// derived streams: training signals, evaluation signals, sensors, and noise
/// never share draws.
struct ExperimentConfig {
  ClusterSpec signal;  // signal.seed is the base for derived per-signal seeds
  bool complex_field = false;
  std::vector<std::vector<int>> factor_sets;         // one per beta
  std::vector<std::vector<int>> timing_factor_sets;  // empty: use factor_sets
  PartitionKind strategy = PartitionKind::kComb;
  double subsampling = 0.4;            // m/n for bench-snr and timing
  std::vector<double> snr_grid_db;     // bench-snr grid
  std::vector<double> subsampling_grid;  // bench-subsampling grid
  double snr_db = 30.0;                // fixed SNR for bench-subsampling/timing
  int trials = 100;
  int dataset_size = 200;  // training signals for kernel learning
  int timing_repeats = 5;
  SolverSettings solver;
  std::uint64_t seed = 1;

  void validate() const {
    signal.validate();
    if (factor_sets.empty()) {
      throw std::invalid_argument("ExperimentConfig: no factor sets");
    }
    for (const auto& f : factor_sets) {
      PartitionSpec probe(signal.shape, f, strategy);  // throws if invalid
      (void)probe;
    }
    for (const auto& f : timing_factor_sets) {
      PartitionSpec probe(signal.shape, f, strategy);
      (void)probe;
    }
    if (trials < 1 || dataset_size < 1 || timing_repeats < 1) {
      throw std::invalid_argument("ExperimentConfig: counts must be >= 1");
    }
    if (!(subsampling > 0 && subsampling <= 1)) {
      throw std::invalid_argument("ExperimentConfig: subsampling outside (0,1]");
    }
    for (double r : subsampling_grid) {
      if (!(r > 0 && r <= 1)) {
        throw std::invalid_argument("ExperimentConfig: ratio outside (0,1]");
      }
    }
  }
};

inline int num_blocks_of(const std::vector<int>& factors) {
  int b = 1;
  for (int f : factors) b *= f;
  return b;
}

/// Measurement count for a target m/n ratio, snapped to the nearest positive
/// multiple of every beta in play so all partitions stay divisible.
inline int snap_measurements(double ratio, std::int64_t n,
                             const std::vector<int>& betas) {
  std::int64_t l = 1;
  for (int b : betas) l = std::lcm(l, static_cast<std::int64_t>(b));
  const double target = ratio * static_cast<double>(n);
  std::int64_t k = static_cast<std::int64_t>(std::llround(target / static_cast<double>(l)));
  if (k < 1) k = 1;
  std::int64_t m = k * l;
  if (m > n) m = n - (n % l);  // largest multiple not exceeding n
  if (m < 1) throw std::invalid_argument("snap_measurements: no feasible m");
  return static_cast<int>(m);
}

// ---- named profiles ----

inline ExperimentConfig desk_profile() {
  ExperimentConfig cfg;
  cfg.signal.shape = Shape({16, 16});
  cfg.signal.num_clusters = 3;
  cfg.signal.cluster_radius = 1;
  cfg.signal.sparsity = 18;
  cfg.signal.amplitude = Amplitude::kGaussian;
  cfg.complex_field = false;
  cfg.factor_sets = {{1, 1}, {2, 2}, {4, 4}};
  cfg.subsampling = 0.4;
  cfg.snr_grid_db = {0, 5, 10, 15, 20, 25, 30};
  cfg.subsampling_grid = {0.2, 0.3, 0.4, 0.5};
  cfg.snr_db = 30.0;
  cfg.trials = 100;
  cfg.dataset_size = 200;
  cfg.timing_repeats = 5;
  cfg.seed = 1;
  return cfg;
}

inline ExperimentConfig paper_profile() {
  ExperimentConfig cfg;
  cfg.signal.shape = Shape({16, 16, 8, 8});
  cfg.signal.num_clusters = 3;
  cfg.signal.cluster_radius = 1;
  cfg.signal.sparsity = 120;
  cfg.signal.amplitude = Amplitude::kGaussian;
  cfg.complex_field = true;
  cfg.factor_sets = {{1, 1, 1, 1}, {2, 2, 2, 2}, {4, 4, 2, 2}};
  // The unpartitioned problem is orders of magnitude slower; timings compare
  // the partitioned methods only.
  cfg.timing_factor_sets = {{2, 2, 2, 2}, {4, 4, 2, 2}};
  cfg.subsampling = 0.4;
  cfg.snr_grid_db = {0, 10, 20, 30};
  cfg.subsampling_grid = {0.2, 0.3, 0.4, 0.5};
  cfg.snr_db = 30.0;
  cfg.trials = 5;
  cfg.dataset_size = 50;
  cfg.timing_repeats = 5;
  cfg.seed = 1;
  return cfg;
}

inline ExperimentConfig profile_by_name(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "paper") return paper_profile();
  throw ConfigError("unknown profile: " + name);
}

// ---- config (de)serialization ----

inline json solver_settings_to_json(const SolverSettings& s) {
  return json{{"residual_tol_factor", s.residual_tol_factor},
              {"logit_scale", s.logit_scale},
              {"prior_clip", s.prior_clip},
              {"iter_budget_factor", s.iter_budget_factor}};
}

inline json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j = cluster_spec_to_json(cfg.signal);
  j.erase("seed");  // the master seed below drives all derived streams
  return json{{"signal", j},
              {"field", cfg.complex_field ? "complex" : "real"},
              {"factor_sets", cfg.factor_sets},
              {"timing_factor_sets", cfg.timing_factor_sets},
              {"strategy",
               cfg.strategy == PartitionKind::kComb ? "comb" : "contiguous"},
              {"subsampling", cfg.subsampling},
              {"snr_grid_db", cfg.snr_grid_db},
              {"subsampling_grid", cfg.subsampling_grid},
              {"snr_db", cfg.snr_db},
              {"trials", cfg.trials},
              {"dataset_size", cfg.dataset_size},
              {"timing_repeats", cfg.timing_repeats},
              {"solver", solver_settings_to_json(cfg.solver)},
              {"seed", cfg.seed}};
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
  try {
    ExperimentConfig cfg;
    const json& sig = j.at("signal");
    cfg.signal.shape = Shape(sig.at("dims").get<std::vector<int>>());
    cfg.signal.num_clusters = sig.at("num_clusters").get<int>();
    cfg.signal.cluster_radius = sig.at("cluster_radius").get<int>();
    cfg.signal.sparsity = sig.at("sparsity").get<int>();
    cfg.signal.amplitude =
        amplitude_from_string(sig.at("amplitude").get<std::string>());
    const std::string field = j.at("field").get<std::string>();
    if (field != "real" && field != "complex") {
      throw ConfigError("field must be 'real' or 'complex'");
    }
    cfg.complex_field = field == "complex";
    cfg.factor_sets = j.at("factor_sets").get<std::vector<std::vector<int>>>();
    cfg.timing_factor_sets =
        j.value("timing_factor_sets", std::vector<std::vector<int>>{});
    cfg.strategy =
        partition_kind_from_string(j.at("strategy").get<std::string>());
    cfg.subsampling = j.at("subsampling").get<double>();
    cfg.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
    cfg.subsampling_grid = j.at("subsampling_grid").get<std::vector<double>>();
    cfg.snr_db = j.at("snr_db").get<double>();
    cfg.trials = j.at("trials").get<int>();
    cfg.dataset_size = j.at("dataset_size").get<int>();
    cfg.timing_repeats = j.at("timing_repeats").get<int>();
    const json& sol = j.at("solver");
    cfg.solver.residual_tol_factor = sol.at("residual_tol_factor").get<double>();
    cfg.solver.logit_scale = sol.at("logit_scale").get<double>();
    cfg.solver.prior_clip = sol.at("prior_clip").get<double>();
    cfg.solver.iter_budget_factor = sol.at("iter_budget_factor").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.signal.seed = cfg.seed;
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
}

// ---- seed streams ----

namespace seeds {
// Stream tags keeping derived seeds disjoint across uses of the master seed.
inline constexpr std::uint64_t kTraining = 1;
inline constexpr std::uint64_t kEvalSignal = 2;
inline constexpr std::uint64_t kSensor = 3;
inline constexpr std::uint64_t kNoise = 4;
}  // namespace seeds

// ---- training (kernel learning) ----

struct TrainedModel {
  CorrelationKernel kernel;
  double s_avg = 0.0;
  int num_signals = 0;
};

template <Scalar T>
std::vector<Tensor<T>> training_dataset(const ExperimentConfig& cfg) {
  std::vector<Tensor<T>> data;
  data.reserve(static_cast<std::size_t>(cfg.dataset_size));
  for (int j = 0; j < cfg.dataset_size; ++j) {
    ClusterSpec s = cfg.signal;
    s.seed = derive_seed(cfg.seed, seeds::kTraining, static_cast<std::uint64_t>(j));
    data.push_back(generate_clustered<T>(s));
  }
  return data;
}

template <Scalar T>
TrainedModel train_model(const ExperimentConfig& cfg) {
  auto [kernel, stats] = learn_kernel(training_dataset<T>(cfg));
  return TrainedModel{std::move(kernel), stats.avg_sparsity, stats.num_signals};
}

// ---- bench rows ----

struct BenchRow {
  double snr_db = 0.0;
  double ratio = 0.0;
  int beta = 1;
  std::string method;  // "standard-bcs" | "serial-bcs"
  double nmse = 0.0;
  double mean_ms = 0.0;
  int trials = 0;
  // Per-trial relative errors ||X - Xhat||^2 / ||X||^2, aligned by trial
  // index across rows of the same config (shared signal seeds) for paired
  // statistics. Not emitted to CSV.
  std::vector<double> rel_errors;
};

struct TimingRow {
  int beta = 1;
  std::string method;  // standard-bcs-parallel | standard-bcs-serial | serial-bcs
  double wall_ms = 0.0;
};

namespace detail {

inline double wall_ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

/// Scales x in place so the clean measurement energy hits the target SNR at
/// unit noise variance, and returns the scaled clean measurements.
template <Scalar T>
MeasurementSet<T> scale_to_snr(Tensor<T>& x, const BlockSensor<T>& sensor,
                               const PartitionMap& map, double snr_db) {
  MeasurementSet<T> clean = measure_clean(sensor, map, x);
  const double energy = measurement_energy(clean);
  if (!(energy > 0)) {
    throw std::runtime_error("scale_to_snr: zero clean measurement energy");
  }
  const double snr_lin = std::pow(10.0, snr_db / 10.0);
  const double c =
      std::sqrt(snr_lin * static_cast<double>(sensor.m()) / energy);
  x.scale(static_cast<T>(c));
  for (auto& yb : clean.y) yb *= static_cast<T>(c);
  return clean;
}

inline RecoveryConfig solver_config(const ExperimentConfig& cfg) {
  RecoveryConfig rc;
  rc.residual_tol_factor = cfg.solver.residual_tol_factor;
  rc.logit_scale = cfg.solver.logit_scale;
  rc.prior_clip = cfg.solver.prior_clip;
  rc.noise_var = 1.0;  // unit noise by construction; signal carries the SNR
  rc.max_iters = 1;    // callers set the real budget via iter_budget
  return rc;
}

inline int iter_budget(const SolverSettings& s, double s_avg, int beta,
                       int block_rows) {
  const int want = static_cast<int>(
      std::ceil(s.iter_budget_factor * s_avg / static_cast<double>(beta)));
  return std::max(1, std::min(want, block_rows));
}

/// Runs every trial of one grid point and fills one row per method. Both
/// methods consume identical measurements per trial, and signal seeds depend
/// only on the trial index, so rows are paired across points and betas.
template <Scalar T>
void run_point(const ExperimentConfig& cfg, const TrainedModel& model,
               const std::vector<int>& factors, int m, double snr_db,
               std::uint64_t point_tag, BenchRow& standard_row,
               BenchRow& serial_row) {
  PartitionSpec pspec(cfg.signal.shape, factors, cfg.strategy);
  const PartitionMap map(pspec);
  const int beta = pspec.num_blocks();
  const std::int64_t n = cfg.signal.shape.size();
  const BlockSensor<T> sensor = draw_sensor<T>(
      m, n, beta,
      derive_seed(cfg.seed, seeds::kSensor, static_cast<std::uint64_t>(beta),
                  static_cast<std::uint64_t>(m)));

  RecoveryConfig rc = solver_config(cfg);
  rc.max_iters = iter_budget(cfg.solver, model.s_avg, beta, sensor.block_rows());

  NmseAccumulator<T> std_acc, ser_acc;
  double std_ms = 0, ser_ms = 0;
  standard_row.rel_errors.clear();
  serial_row.rel_errors.clear();

  for (int t = 0; t < cfg.trials; ++t) {
    ClusterSpec sig = cfg.signal;
    sig.seed = derive_seed(cfg.seed, seeds::kEvalSignal,
                           static_cast<std::uint64_t>(t));
    Tensor<T> x = generate_clustered<T>(sig);
    MeasurementSet<T> ms = scale_to_snr(x, sensor, map, snr_db);
    Rng noise_rng(derive_seed(cfg.seed, seeds::kNoise, point_tag,
                              static_cast<std::uint64_t>(t)));
    add_noise(ms, 1.0, noise_rng);
    const double ref = x.frobenius_sq();

    auto t0 = std::chrono::steady_clock::now();
    RecoveryResult<T> std_res = parallel_bcs(ms, sensor, map, rc);
    std_ms += wall_ms_since(t0);
    const double std_err = distance_sq(x, std_res.x_hat);
    std_acc.add_raw(std_err, ref);
    standard_row.rel_errors.push_back(std_err / ref);

    t0 = std::chrono::steady_clock::now();
    RecoveryResult<T> ser_res =
        serial_bcs(ms, sensor, map, model.kernel, model.s_avg, rc);
    ser_ms += wall_ms_since(t0);
    const double ser_err = distance_sq(x, ser_res.x_hat);
    ser_acc.add_raw(ser_err, ref);
    serial_row.rel_errors.push_back(ser_err / ref);
  }

  standard_row.snr_db = serial_row.snr_db = snr_db;
  standard_row.ratio = serial_row.ratio =
      static_cast<double>(m) / static_cast<double>(n);
  standard_row.beta = serial_row.beta = beta;
  standard_row.method = "standard-bcs";
  serial_row.method = "serial-bcs";
  standard_row.nmse = std_acc.value();
  serial_row.nmse = ser_acc.value();
  standard_row.mean_ms = std_ms / cfg.trials;
  serial_row.mean_ms = ser_ms / cfg.trials;
  standard_row.trials = serial_row.trials = cfg.trials;
}

}  // namespace detail

inline std::vector<int> betas_of(const std::vector<std::vector<int>>& sets) {
  std::vector<int> betas;
  betas.reserve(sets.size());
  for (const auto& f : sets) betas.push_back(num_blocks_of(f));
  return betas;
}

/// NMSE vs SNR at the configured subsampling ratio.
template <Scalar T>
std::vector<BenchRow> run_snr_bench(const ExperimentConfig& cfg,
                                    const TrainedModel& model) {
  cfg.validate();
  const int m = snap_measurements(cfg.subsampling, cfg.signal.shape.size(),
                                  betas_of(cfg.factor_sets));
  std::vector<BenchRow> rows;
  std::uint64_t point = 0;
  for (std::size_t fi = 0; fi < cfg.factor_sets.size(); ++fi) {
    for (double snr : cfg.snr_grid_db) {
      BenchRow std_row, ser_row;
      detail::run_point<T>(cfg, model, cfg.factor_sets[fi], m, snr,
                           /*point_tag=*/0x100 + point++, std_row, ser_row);
      rows.push_back(std::move(std_row));
      rows.push_back(std::move(ser_row));
    }
  }
  return rows;
}

/// NMSE vs subsampling ratio at the configured SNR.
template <Scalar T>
std::vector<BenchRow> run_subsampling_bench(const ExperimentConfig& cfg,
                                            const TrainedModel& model) {
  cfg.validate();
  const std::vector<int> betas = betas_of(cfg.factor_sets);
  std::vector<BenchRow> rows;
  std::uint64_t point = 0;
  for (std::size_t fi = 0; fi < cfg.factor_sets.size(); ++fi) {
    for (double ratio : cfg.subsampling_grid) {
      const int m = snap_measurements(ratio, cfg.signal.shape.size(), betas);
      BenchRow std_row, ser_row;
      detail::run_point<T>(cfg, model, cfg.factor_sets[fi], m, cfg.snr_db,
                           /*point_tag=*/0x2000 + point++, std_row, ser_row);
      rows.push_back(std::move(std_row));
      rows.push_back(std::move(ser_row));
    }
  }
  return rows;
}

/// Median wall clock per beta and method on one fixed problem size.
/// standard-bcs is timed single-threaded and with concurrent block solves;
/// serial-bcs is inherently sequential.
template <Scalar T>
std::vector<TimingRow> run_timing(const ExperimentConfig& cfg,
                                  const TrainedModel& model) {
  cfg.validate();
  const auto& sets =
      cfg.timing_factor_sets.empty() ? cfg.factor_sets : cfg.timing_factor_sets;
  const std::vector<int> betas = betas_of(sets);
  const int m =
      snap_measurements(cfg.subsampling, cfg.signal.shape.size(), betas);
  std::vector<TimingRow> rows;

  for (const auto& factors : sets) {
    PartitionSpec pspec(cfg.signal.shape, factors, cfg.strategy);
    const PartitionMap map(pspec);
    const int beta = pspec.num_blocks();
    const BlockSensor<T> sensor = draw_sensor<T>(
        m, cfg.signal.shape.size(), beta,
        derive_seed(cfg.seed, seeds::kSensor, static_cast<std::uint64_t>(beta),
                    static_cast<std::uint64_t>(m)));
    RecoveryConfig rc = detail::solver_config(cfg);
    rc.max_iters =
        detail::iter_budget(cfg.solver, model.s_avg, beta, sensor.block_rows());

    std::vector<double> par_ms, ser1_ms, serial_ms;
    for (int r = 0; r < cfg.timing_repeats; ++r) {
      ClusterSpec sig = cfg.signal;
      sig.seed = derive_seed(cfg.seed, seeds::kEvalSignal,
                             static_cast<std::uint64_t>(r));
      Tensor<T> x = generate_clustered<T>(sig);
      MeasurementSet<T> ms = detail::scale_to_snr(x, sensor, map, cfg.snr_db);
      Rng noise_rng(derive_seed(cfg.seed, seeds::kNoise, 0x7000,
                                static_cast<std::uint64_t>(r)));
      add_noise(ms, 1.0, noise_rng);

      auto t0 = std::chrono::steady_clock::now();
      parallel_bcs(ms, sensor, map, rc, /*num_threads=*/0);
      par_ms.push_back(detail::wall_ms_since(t0));

      t0 = std::chrono::steady_clock::now();
      parallel_bcs(ms, sensor, map, rc, /*num_threads=*/1);
      ser1_ms.push_back(detail::wall_ms_since(t0));

      t0 = std::chrono::steady_clock::now();
      serial_bcs(ms, sensor, map, model.kernel, model.s_avg, rc);
      serial_ms.push_back(detail::wall_ms_since(t0));
    }
    rows.push_back({beta, "standard-bcs-parallel", median(par_ms)});
    rows.push_back({beta, "standard-bcs-serial", median(ser1_ms)});
    rows.push_back({beta, "serial-bcs", median(serial_ms)});
  }
  return rows;
}

// ---- CSV emission ----

namespace detail {
inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}
}  // namespace detail

inline std::string snr_rows_to_csv(const std::vector<BenchRow>& rows) {
  std::string out = "snr_db,beta,method,nmse,mean_ms\n";
  for (const auto& r : rows) {
    out += detail::fmt(r.snr_db) + "," + std::to_string(r.beta) + "," +
           r.method + "," + detail::fmt(r.nmse) + "," + detail::fmt(r.mean_ms) +
           "\n";
  }
  return out;
}

inline std::string subsampling_rows_to_csv(const std::vector<BenchRow>& rows) {
  std::string out = "ratio,beta,method,nmse\n";
  for (const auto& r : rows) {
    out += detail::fmt(r.ratio) + "," + std::to_string(r.beta) + "," +
           r.method + "," + detail::fmt(r.nmse) + "\n";
  }
  return out;
}

inline std::string timing_rows_to_csv(const std::vector<TimingRow>& rows) {
  std::string out = "beta,method,wall_ms\n";
  for (const auto& r : rows) {
    out += std::to_string(r.beta) + "," + r.method + "," +
           detail::fmt(r.wall_ms) + "\n";
  }
  return out;
}

inline std::string bound_points_to_csv(const std::vector<BoundPoint>& pts) {
  std::string out = "beta,mu_lower_bound,mse_upper_bound\n";
  for (const auto& p : pts) {
    out += std::to_string(p.beta) + "," + detail::fmt(p.mu_lower_bound) + ",";
    if (p.mse_upper_bound) out += detail::fmt(*p.mse_upper_bound);
    out += "\n";
  }
  return out;
}

}  // namespace bcs
