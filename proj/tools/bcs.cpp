// Benchmark CLI: dataset generation, kernel learning, bound curves, and the
// NMSE/timing experiments. Exit codes: 0 ok, 1 runtime failure, 2 bad config.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "bcs/experiments.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::string profile = "desk";
  std::optional<std::uint64_t> seed;
  std::string data_dir;  // learn-kernel input override
};

bcs::ExperimentConfig resolve_config(const CommonFlags& flags) {
  bcs::ExperimentConfig cfg = bcs::profile_by_name(flags.profile);
  if (!flags.config_path.empty()) {
    bcs::json base = bcs::experiment_config_to_json(cfg);
    base.merge_patch(bcs::read_json_file(flags.config_path));
    cfg = bcs::experiment_config_from_json(base);
  }
  if (flags.seed) {
    cfg.seed = *flags.seed;
    cfg.signal.seed = *flags.seed;
  }
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_sidecar(const fs::path& out_dir, const std::string& name,
                   const bcs::ExperimentConfig& cfg) {
  bcs::write_json_file(out_dir / (name + "_config.json"),
                       bcs::experiment_config_to_json(cfg));
}

// ---- gen-data ----

template <bcs::Scalar T>
void gen_data_t(const bcs::ExperimentConfig& cfg, const fs::path& dir) {
  for (int j = 0; j < cfg.dataset_size; ++j) {
    bcs::ClusterSpec s = cfg.signal;
    s.seed = bcs::derive_seed(cfg.seed, bcs::seeds::kTraining,
                              static_cast<std::uint64_t>(j));
    const bcs::Tensor<T> x = bcs::generate_clustered<T>(s);
    bcs::write_json_file(dir / ("signal_" + std::to_string(j) + ".json"),
                         bcs::tensor_to_json(x));
  }
}

int cmd_gen_data(const CommonFlags& flags) {
  const bcs::ExperimentConfig cfg = resolve_config(flags);
  const fs::path dir = fs::path(flags.out_dir) / "dataset";
  fs::create_directories(dir);
  if (cfg.complex_field) {
    gen_data_t<std::complex<double>>(cfg, dir);
  } else {
    gen_data_t<double>(cfg, dir);
  }
  bcs::json spec = bcs::cluster_spec_to_json(cfg.signal);
  spec["seed"] = cfg.seed;
  bcs::write_json_file(dir / "manifest.json",
                       bcs::json{{"count", cfg.dataset_size},
                                 {"field", cfg.complex_field ? "complex" : "real"},
                                 {"spec", spec}});
  std::cout << "wrote " << cfg.dataset_size << " signals to " << dir.string()
            << "\n";
  return 0;
}

// ---- learn-kernel ----

template <bcs::Scalar T>
std::pair<bcs::CorrelationKernel, bcs::DatasetStats> learn_from_dir(
    const fs::path& dir, int count) {
  std::vector<bcs::Tensor<T>> data;
  data.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const fs::path f = dir / ("signal_" + std::to_string(j) + ".json");
    data.push_back(bcs::tensor_from_json<T>(bcs::read_json_file(f)));
  }
  return bcs::learn_kernel(data);
}

int cmd_learn_kernel(const CommonFlags& flags) {
  const fs::path dir = flags.data_dir.empty()
                           ? fs::path(flags.out_dir) / "dataset"
                           : fs::path(flags.data_dir);
  const bcs::json manifest = bcs::read_json_file(dir / "manifest.json");
  int count = 0;
  std::string field;
  try {
    count = manifest.at("count").get<int>();
    field = manifest.at("field").get<std::string>();
  } catch (const bcs::json::exception& e) {
    throw bcs::ConfigError(std::string("manifest: ") + e.what());
  }
  if (count < 1) throw bcs::ConfigError("manifest: empty dataset");

  bcs::CorrelationKernel kernel;
  bcs::DatasetStats stats;
  if (field == "complex") {
    std::tie(kernel, stats) = learn_from_dir<std::complex<double>>(dir, count);
  } else if (field == "real") {
    std::tie(kernel, stats) = learn_from_dir<double>(dir, count);
  } else {
    throw bcs::ConfigError("manifest: unknown field " + field);
  }

  fs::create_directories(flags.out_dir);
  const fs::path kfile = fs::path(flags.out_dir) / "kernel.json";
  bcs::write_json_file(kfile, bcs::kernel_to_json(kernel));
  bcs::json dims = bcs::json::array();
  for (int l = 0; l < stats.shape.order(); ++l) dims.push_back(stats.shape.dim(l));
  bcs::write_json_file(fs::path(flags.out_dir) / "kernel_stats.json",
                       bcs::json{{"num_signals", stats.num_signals},
                                 {"avg_sparsity", stats.avg_sparsity},
                                 {"dims", dims}});
  std::cout << "wrote " << kfile.string() << " (signals: " << stats.num_signals
            << ", avg sparsity: " << stats.avg_sparsity << ")\n";
  return 0;
}

// ---- benches ----

template <bcs::Scalar T>
int run_bench(const bcs::ExperimentConfig& cfg, const CommonFlags& flags,
              const std::string& which) {
  const bcs::TrainedModel model = bcs::train_model<T>(cfg);
  fs::create_directories(flags.out_dir);
  const fs::path out_dir(flags.out_dir);
  if (which == "snr") {
    const auto rows = bcs::run_snr_bench<T>(cfg, model);
    write_text(out_dir / "bench_snr.csv", bcs::snr_rows_to_csv(rows));
    write_sidecar(out_dir, "bench_snr", cfg);
    std::cout << bcs::snr_rows_to_csv(rows);
  } else if (which == "subsampling") {
    const auto rows = bcs::run_subsampling_bench<T>(cfg, model);
    write_text(out_dir / "bench_subsampling.csv",
               bcs::subsampling_rows_to_csv(rows));
    write_sidecar(out_dir, "bench_subsampling", cfg);
    std::cout << bcs::subsampling_rows_to_csv(rows);
  } else {
    const auto rows = bcs::run_timing<T>(cfg, model);
    write_text(out_dir / "timing.csv", bcs::timing_rows_to_csv(rows));
    write_sidecar(out_dir, "timing", cfg);
    std::cout << bcs::timing_rows_to_csv(rows);
  }
  return 0;
}

int cmd_bench(const CommonFlags& flags, const std::string& which) {
  const bcs::ExperimentConfig cfg = resolve_config(flags);
  return cfg.complex_field ? run_bench<std::complex<double>>(cfg, flags, which)
                           : run_bench<double>(cfg, flags, which);
}

// ---- bounds ----

struct BoundsArgs {
  int s = 50;
  double alpha = 0.5;
  double sigma = 1e-2;
  std::int64_t m = 2000;
  std::int64_t n = 10000;
  std::vector<std::int64_t> betas;  // default: divisors of gcd(m, n) up to 50
};

int cmd_bounds(const CommonFlags& flags) {
  BoundsArgs args;
  if (!flags.config_path.empty()) {
    const bcs::json j = bcs::read_json_file(flags.config_path);
    const bcs::json b = j.contains("bounds") ? j.at("bounds") : j;
    try {
      args.s = b.value("s", args.s);
      args.alpha = b.value("alpha", args.alpha);
      args.sigma = b.value("sigma", args.sigma);
      args.m = b.value("m", args.m);
      args.n = b.value("n", args.n);
      args.betas = b.value("betas", args.betas);
    } catch (const bcs::json::exception& e) {
      throw bcs::ConfigError(std::string("bounds config: ") + e.what());
    }
  }
  if (args.betas.empty()) {
    for (std::int64_t beta = 1; beta <= 50; ++beta) {
      if (args.m % beta == 0 && args.n % beta == 0) args.betas.push_back(beta);
    }
  }

  bcs::BoundParams p;
  p.s = args.s;
  p.sigma = args.sigma;
  p.alpha = args.alpha;
  p.m = static_cast<double>(args.m);
  p.n = args.n;
  const auto pts = bcs::bound_curve(p, args.betas);

  fs::create_directories(flags.out_dir);
  write_text(fs::path(flags.out_dir) / "bounds.csv",
             bcs::bound_points_to_csv(pts));
  bcs::write_json_file(fs::path(flags.out_dir) / "bounds_config.json",
                       bcs::json{{"s", args.s},
                                 {"alpha", args.alpha},
                                 {"sigma", args.sigma},
                                 {"m", args.m},
                                 {"n", args.n},
                                 {"betas", args.betas}});
  std::cout << bcs::bound_points_to_csv(pts);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block compressed sensing benchmarks"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint64_t seed_value = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* sub, bool with_data = false) {
    sub->add_option("--config", flags.config_path, "JSON config overriding the profile");
    sub->add_option("--out", flags.out_dir, "output directory");
    sub->add_option("--profile", flags.profile, "named profile: desk | paper");
    sub->add_option("--seed", seed_value, "master seed override")
        ->each([&](const std::string&) { seed_given = true; });
    if (with_data) {
      sub->add_option("--data", flags.data_dir, "dataset directory (default <out>/dataset)");
    }
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate a clustered-sparse dataset");
  add_common(gen);
  CLI::App* learn = app.add_subcommand("learn-kernel", "learn the support correlation kernel");
  add_common(learn, /*with_data=*/true);
  CLI::App* snr = app.add_subcommand("bench-snr", "NMSE vs SNR benchmark");
  add_common(snr);
  CLI::App* sub = app.add_subcommand("bench-subsampling", "NMSE vs subsampling ratio benchmark");
  add_common(sub);
  CLI::App* timing = app.add_subcommand("timing", "wall-clock comparison per beta");
  add_common(timing);
  CLI::App* bounds = app.add_subcommand("bounds", "coherence and MSE bound curve");
  add_common(bounds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (seed_given) flags.seed = seed_value;

  try {
    if (gen->parsed()) return cmd_gen_data(flags);
    if (learn->parsed()) return cmd_learn_kernel(flags);
    if (snr->parsed()) return cmd_bench(flags, "snr");
    if (sub->parsed()) return cmd_bench(flags, "subsampling");
    if (timing->parsed()) return cmd_bench(flags, "timing");
    if (bounds->parsed()) return cmd_bounds(flags);
  } catch (const bcs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
