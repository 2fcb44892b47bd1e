// Acceptance gate: one test case per shipping criterion. Each prints exactly
// one "ACCEPTANCE <n> (<name>): PASS|FAIL" line (plus measurement notes) so a
// log scrape of this binary reads as a checklist. Criterion logic is written
// against plain bools collected in a Gate rather than inline assertion macros
// so a mid-case exception still yields the verdict line.

#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bcs/experiments.hpp"

using namespace bcs;

namespace {

// ---- pinned tolerances and workloads ----
constexpr double kIdentityTol = 1e-15;  // bound identity agreement
constexpr double kOracleTol = 1e-12;    // oracle-vs-implementation agreement
constexpr double kAlpha = 0.05;         // significance level for paired tests
constexpr int kSensorDraws = 50;        // coherence oracle sample
constexpr int kKernelDatasets = 20;     // learning oracle sample
constexpr int kPursuitTrials = 100;     // OMP / LW-OMP trial counts
constexpr int kMinExactRecoveries = 99; // out of kPursuitTrials
constexpr int kDeskTrials = 200;        // Monte-Carlo size for criteria 7-9
constexpr int kMaxInversions = 1;       // tolerated per subsampling curve

struct Gate {
  int id;
  std::string name;
  bool ok = true;
  std::vector<std::string> notes;
  std::vector<std::string> failures;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

void run_gate(int id, const std::string& name,
              const std::function<void(Gate&)>& body) {
  Gate g{id, name};
  try {
    body(g);
  } catch (const std::exception& e) {
    g.expect(false, std::string("unexpected exception: ") + e.what());
  }
  std::cout << "ACCEPTANCE " << id << " (" << name
            << "): " << (g.ok ? "PASS" : "FAIL") << "\n";
  for (const auto& n : g.notes) std::cout << "    " << n << "\n";
  for (const auto& f : g.failures) std::cout << "    FAIL: " << f << "\n";
  std::cout.flush();
  CAPTURE(id, name);
  REQUIRE(g.ok);
}

std::string str(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<std::int64_t> common_divisors(std::int64_t m, std::int64_t n,
                                          std::int64_t cap) {
  std::vector<std::int64_t> out;
  const std::int64_t g = std::gcd(m, n);
  for (std::int64_t b = 1; b <= cap; ++b) {
    if (g % b == 0) out.push_back(b);
  }
  return out;
}

// Dense equivalent of a block-diagonal operator. Column order groups by
// block; coherence is permutation-invariant, so the signal-domain ordering
// is irrelevant.
template <Scalar T>
Matrix<T> assemble_dense(const BlockSensor<T>& sensor) {
  Matrix<T> dense = Matrix<T>::Zero(sensor.m(), sensor.n());
  for (int b = 0; b < sensor.num_blocks(); ++b) {
    dense.block(static_cast<Eigen::Index>(b) * sensor.block_rows(),
                static_cast<Eigen::Index>(b) * sensor.block_cols(),
                sensor.block_rows(), sensor.block_cols()) = sensor.block(b);
  }
  return dense;
}

}  // namespace

// ---------------------------------------------------------------------------
// 1. Welch-bound identities and monotonicity in beta.
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: bound identities", "[c1]") {
  run_gate(1, "bound-identities", [](Gate& g) {
    const std::vector<std::pair<std::int64_t, std::int64_t>> grids = {
        {4, 16},    {12, 24},        {96, 256},
        {2000, 10000}, {6528, 16384}, {64, 4096}};
    int identities = 0;
    for (const auto& [m, n] : grids) {
      g.expect(std::abs(bcs_welch_bound(m, n, 1) - welch_bound(m, n)) <=
                   kIdentityTol,
               "beta=1 identity at m=" + std::to_string(m));
      std::vector<double> curve;
      for (std::int64_t beta : common_divisors(m, n, m)) {
        if (n / beta < 2) continue;
        const double lhs = bcs_welch_bound(m, n, beta);
        const double rhs = welch_bound(m / beta, n / beta);
        g.expect(std::abs(lhs - rhs) <= kIdentityTol,
                 "reduced-frame identity at m=" + std::to_string(m) +
                     " beta=" + std::to_string(beta));
        curve.push_back(lhs);
        ++identities;
      }
      for (std::size_t i = 1; i < curve.size(); ++i) {
        g.expect(curve[i] > curve[i - 1],
                 "bound not strictly increasing at m=" + std::to_string(m));
      }
    }
    g.note("checked " + std::to_string(identities) +
           " divisor identities across " + std::to_string(grids.size()) +
           " (m, n) grids");
  });
}

// ---------------------------------------------------------------------------
// 2. MSE-bound curve shape at s=50, n=1e4, alpha=0.5, sigma=1e-2, m=2000.
//    At that m the coherence floor voids the OMP guarantee for every
//    beta >= 2, so the strict-increase clause is checked over the defined
//    points; a supplementary m=9600 sweep exercises the full-curve shape.
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: mse bound curve", "[c2]") {
  run_gate(2, "mse-bound-curve", [](Gate& g) {
    BoundParams p;
    p.s = 50;
    p.sigma = 1e-2;
    p.alpha = 0.5;
    p.m = 2000.0;
    p.n = 10000;
    const auto betas = common_divisors(2000, 10000, 50);
    const auto pts = bound_curve(p, betas);

    std::vector<double> defined;
    for (const auto& pt : pts) {
      if (pt.mse_upper_bound) defined.push_back(*pt.mse_upper_bound);
    }
    for (std::size_t i = 1; i < defined.size(); ++i) {
      g.expect(defined[i] > defined[i - 1],
               "m=2000 curve not strictly increasing over defined points");
    }
    g.expect(pts.front().beta == 1 && pts.front().mse_upper_bound.has_value(),
             "beta=1 guarantee undefined at m=2000");
    const double eq8 = omp_mse_bound(p, welch_bound(2000, 10000));
    g.expect(pts.front().mse_upper_bound.value_or(-1.0) == eq8,
             "beta=1 value differs from the Welch-floor guarantee");
    g.note("m=2000: " + std::to_string(defined.size()) + "/" +
           std::to_string(pts.size()) +
           " grid points keep a defined guarantee (floor voids it from "
           "beta=2 on); beta=1 bound " +
           str(eq8));

    // Supplementary shape check where the guarantee survives all betas.
    p.m = 9600.0;
    const auto betas2 = common_divisors(9600, 10000, 50);
    const auto pts2 = bound_curve(p, betas2);
    for (const auto& pt : pts2) {
      g.expect(pt.mse_upper_bound.has_value(),
               "m=9600 guarantee undefined at beta=" + std::to_string(pt.beta));
    }
    for (std::size_t i = 1; i < pts2.size(); ++i) {
      g.expect(pts2[i].mse_upper_bound.value_or(0.0) >
                   pts2[i - 1].mse_upper_bound.value_or(0.0),
               "m=9600 curve not strictly increasing at beta=" +
                   std::to_string(pts2[i].beta));
    }
    g.note("m=9600: strictly increasing over all " +
           std::to_string(pts2.size()) + " divisors up to 50");
  });
}

// ---------------------------------------------------------------------------
// 3. Block coherence equals the assembled dense operator's coherence.
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: block coherence oracle", "[c3]") {
  run_gate(3, "block-coherence-oracle", [](Gate& g) {
    const std::vector<std::array<int, 3>> configs = {
        {16, 64, 4}, {32, 128, 8}, {24, 96, 3},  {64, 256, 16}, {8, 32, 2},
        {48, 144, 6}, {96, 256, 1}, {20, 100, 5}, {18, 54, 2},  {40, 160, 10}};
    double worst = 0.0;
    for (int i = 0; i < kSensorDraws; ++i) {
      const auto& [m, n, beta] = configs[static_cast<std::size_t>(i) %
                                         configs.size()];
      const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);
      double diff = 0.0;
      if (i % 5 == 4) {
        const auto sensor = draw_sensor<std::complex<double>>(m, n, beta, seed);
        diff = std::abs(block_coherence(sensor) -
                        mutual_coherence(assemble_dense(sensor)));
      } else {
        const auto sensor = draw_sensor<double>(m, n, beta, seed);
        diff = std::abs(block_coherence(sensor) -
                        mutual_coherence(assemble_dense(sensor)));
      }
      worst = std::max(worst, diff);
      g.expect(diff <= kOracleTol,
               "sensor " + std::to_string(i) + " disagrees by " + str(diff));
    }
    g.note(std::to_string(kSensorDraws) +
           " sensors (incl. complex), worst |difference| " + str(worst));
  });
}

// ---------------------------------------------------------------------------
// 4. Kernel learning equals a brute-force neighbor-count oracle.
// ---------------------------------------------------------------------------
namespace {

// Independent reference: count active Chebyshev-1 neighbors per offset by
// scanning support pairs, normalize per signal, average over signals.
std::vector<double> oracle_kernel_8x8(const std::vector<Tensor<double>>& data) {
  const Shape kshape({3, 3});
  std::vector<double> acc(9, 0.0);
  int used = 0;
  for (const auto& x : data) {
    std::vector<std::array<int, 2>> support;
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        if (std::abs(x[r * 8 + c]) > 0) support.push_back({r, c});
      }
    }
    if (support.empty()) continue;
    ++used;
    std::vector<double> counts(9, 0.0);
    for (const auto& [r, c] : support) {
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || rr >= 8 || cc < 0 || cc >= 8) continue;
          if (std::abs(x[rr * 8 + cc]) > 0) {
            counts[static_cast<std::size_t>((dr + 1) * 3 + (dc + 1))] += 1.0;
          }
        }
      }
    }
    for (std::size_t k = 0; k < 9; ++k) {
      acc[k] += counts[k] / static_cast<double>(support.size());
    }
  }
  for (double& v : acc) v /= static_cast<double>(used);
  return acc;
}

}  // namespace

TEST_CASE("acceptance: kernel learning oracle", "[c4]") {
  run_gate(4, "kernel-learning-oracle", [](Gate& g) {
    // Hand trace: [1, 1, 0] has one active neighbor per active entry.
    const Tensor<double> toy(Shape({3}), {1.0, 1.0, 0.0});
    const auto [tk, tstats] = learn_kernel(std::vector<Tensor<double>>{toy});
    g.expect(tk.values.data() == std::vector<double>{0.5, 0.0, 0.5},
             "[1,1,0] kernel is not exactly [0.5, 0, 0.5]");
    g.expect(tstats.avg_sparsity == 2.0, "[1,1,0] sparsity is not 2");

    std::mt19937_64 rng(424242);
    std::bernoulli_distribution coin(0.2);
    double worst = 0.0;
    for (int d = 0; d < kKernelDatasets; ++d) {
      std::vector<Tensor<double>> data;
      for (int sig = 0; sig < 10; ++sig) {
        Tensor<double> x(Shape({8, 8}));
        bool any_active = false;
        for (std::int64_t i = 0; i < 64; ++i) {
          if (coin(rng)) {
            x[i] = 1.0;
            any_active = true;
          }
        }
        if (!any_active) x[0] = 1.0;  // keep every signal non-empty
        data.push_back(std::move(x));
      }
      const auto [kernel, stats] = learn_kernel(data);
      const std::vector<double> want = oracle_kernel_8x8(data);
      for (std::int64_t i = 0; i < kernel.values.size(); ++i) {
        const double diff =
            std::abs(kernel.values[i] - want[static_cast<std::size_t>(i)]);
        worst = std::max(worst, diff);
        g.expect(diff <= kOracleTol, "dataset " + std::to_string(d) +
                                         " offset " + std::to_string(i) +
                                         " off by " + str(diff));
      }
    }
    g.note(std::to_string(kKernelDatasets) +
           " random 8x8 datasets, worst entry |difference| " + str(worst));
  });
}

// ---------------------------------------------------------------------------
// 5. OMP exact support recovery on noiseless Gaussian 64x256, s=4.
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: omp exact recovery", "[c5]") {
  run_gate(5, "omp-exact-recovery", [](Gate& g) {
    constexpr int kM = 64, kN = 256, kS = 4;
    int exact = 0;
    for (int t = 0; t < kPursuitTrials; ++t) {
      std::mt19937_64 rng(9000 + static_cast<std::uint64_t>(t));
      std::normal_distribution<double> gauss;
      Matrix<double> a(kM, kN);
      for (int j = 0; j < kN; ++j) {
        for (int i = 0; i < kM; ++i) a(i, j) = gauss(rng);
        a.col(j).normalize();
      }
      std::vector<int> idx(kN);
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      std::vector<int> truth(idx.begin(), idx.begin() + kS);
      Vector<double> x = Vector<double>::Zero(kN);
      for (int j : truth) x[j] = rng() % 2 == 0 ? 1.0 : -1.0;
      const Vector<double> y = a * x;

      RecoveryConfig cfg;
      cfg.max_iters = kS;
      cfg.residual_tol_factor = 0.0;  // run the full budget
      cfg.noise_var = 0.0;
      const BlockSolve<double> sol = omp(y, a, cfg);  // asserts residual decay

      std::vector<int> got(sol.support.begin(), sol.support.end());
      std::sort(got.begin(), got.end());
      std::sort(truth.begin(), truth.end());
      if (got == truth) ++exact;
    }
    g.note("exact support recovery in " + std::to_string(exact) + "/" +
           std::to_string(kPursuitTrials) + " trials");
    g.expect(exact >= kMinExactRecoveries,
             "recovery rate below " + std::to_string(kMinExactRecoveries) +
                 "/" + std::to_string(kPursuitTrials));
  });
}

// ---------------------------------------------------------------------------
// 6. LW-OMP with a uniform prior reduces to OMP exactly.
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: lw-omp uniform reduction", "[c6]") {
  run_gate(6, "lw-omp-uniform-reduction", [](Gate& g) {
    for (int t = 0; t < kPursuitTrials; ++t) {
      std::mt19937_64 rng(7700 + static_cast<std::uint64_t>(t));
      std::normal_distribution<double> gauss;
      const int m = 8 + static_cast<int>(rng() % 25);   // 8..32
      const int n = 16 + static_cast<int>(rng() % 49);  // 16..64
      const int s = 1 + static_cast<int>(rng() % 4);
      Matrix<double> a(m, n);
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i) a(i, j) = gauss(rng);
        a.col(j).normalize();
      }
      Vector<double> x = Vector<double>::Zero(n);
      for (int k = 0; k < s; ++k) x[static_cast<int>(rng() % n)] = gauss(rng);
      const double sigma = 0.3;
      Vector<double> y = a * x;
      for (int i = 0; i < m; ++i) y[i] += sigma * gauss(rng);

      RecoveryConfig cfg;
      cfg.max_iters = std::min(m, s + 2);
      cfg.residual_tol_factor = 1.0;
      cfg.noise_var = sigma * sigma;

      Tensor<double> prior(Shape({n}));
      const double p0 = static_cast<double>(s) / static_cast<double>(n);
      for (std::int64_t i = 0; i < n; ++i) prior[i] = p0;

      const BlockSolve<double> plain = omp(y, a, cfg);
      const BlockSolve<double> weighted =
          lw_omp(y, a, prior, sigma * sigma, cfg);

      g.expect(plain.support == weighted.support,
               "support sequences diverge on trial " + std::to_string(t));
      g.expect(plain.x == weighted.x,
               "estimates diverge on trial " + std::to_string(t));
    }
    g.note(std::to_string(kPursuitTrials) +
           " paired trials with identical selection sequences");
  });
}

// ---------------------------------------------------------------------------
// 7. Standard-BCS NMSE degrades as beta grows (desk profile, 40%, 30 dB).
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: nmse degrades with beta", "[c7]") {
  run_gate(7, "nmse-degrades-with-beta", [](Gate& g) {
    ExperimentConfig cfg = desk_profile();
    cfg.trials = kDeskTrials;
    cfg.snr_grid_db = {30.0};
    const TrainedModel model = train_model<double>(cfg);
    const auto rows = run_snr_bench<double>(cfg, model);
    // Rows alternate standard/serial per beta: {1, 4, 16}.
    const BenchRow& b1 = rows[0];
    const BenchRow& b4 = rows[2];
    const BenchRow& b16 = rows[4];
    g.note("standard-bcs NMSE: beta=1 " + str(b1.nmse) + ", beta=4 " +
           str(b4.nmse) + ", beta=16 " + str(b16.nmse));
    g.expect(b4.nmse >= b1.nmse, "NMSE(4) < NMSE(1)");
    g.expect(b16.nmse >= b4.nmse, "NMSE(16) < NMSE(4)");
    g.expect(b16.nmse > b1.nmse, "NMSE(16) <= NMSE(1)");

    const PairedTest t = paired_t_test(b16.rel_errors, b1.rel_errors);
    g.note("paired one-sided p (beta=16 worse than beta=1): " +
           str(t.p_greater()));
    g.expect(t.p_greater() < kAlpha,
             "degradation not significant at p < " + str(kAlpha));
  });
}

// ---------------------------------------------------------------------------
// 8. Serial-BCS beats standard-BCS at moderate SNR, ties at 0 dB (beta=16).
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: serial advantage at moderate snr", "[c8]") {
  run_gate(8, "serial-advantage-moderate-snr", [](Gate& g) {
    ExperimentConfig cfg = desk_profile();
    cfg.trials = kDeskTrials;
    cfg.factor_sets = {{4, 4}};  // beta = 16
    cfg.snr_grid_db = {0.0, 20.0, 25.0, 30.0};
    const TrainedModel model = train_model<double>(cfg);
    const auto rows = run_snr_bench<double>(cfg, model);

    for (std::size_t i = 1; i < 4; ++i) {  // 20, 25, 30 dB
      const BenchRow& std_row = rows[2 * i];
      const BenchRow& ser_row = rows[2 * i + 1];
      const PairedTest t =
          paired_t_test(ser_row.rel_errors, std_row.rel_errors);
      g.note(str(std_row.snr_db) + " dB: standard " + str(std_row.nmse) +
             ", serial " + str(ser_row.nmse) + ", one-sided p " +
             str(t.p_less()));
      g.expect(ser_row.nmse < std_row.nmse,
               "serial NMSE not lower at " + str(std_row.snr_db) + " dB");
      g.expect(t.p_less() < kAlpha,
               "advantage not significant at " + str(std_row.snr_db) + " dB");
    }

    const PairedTest t0 = paired_t_test(rows[1].rel_errors, rows[0].rel_errors);
    g.note("0 dB: standard " + str(rows[0].nmse) + ", serial " +
           str(rows[1].nmse) + ", diff CI [" + str(t0.ci_low) + ", " +
           str(t0.ci_high) + "]");
    g.expect(t0.ci_low <= 0.0 && 0.0 <= t0.ci_high,
             "methods distinguishable at 0 dB (CI excludes zero)");
  });
}

// ---------------------------------------------------------------------------
// 9. NMSE is non-increasing in the subsampling ratio (<=1 inversion/curve).
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: subsampling monotonicity", "[c9]") {
  run_gate(9, "subsampling-monotonicity", [](Gate& g) {
    ExperimentConfig cfg = desk_profile();
    cfg.trials = kDeskTrials;
    const TrainedModel model = train_model<double>(cfg);
    const auto rows = run_subsampling_bench<double>(cfg, model);
    const std::size_t n_ratios = cfg.subsampling_grid.size();

    for (std::size_t fi = 0; fi < cfg.factor_sets.size(); ++fi) {
      for (int method = 0; method < 2; ++method) {
        std::vector<double> curve;
        std::string label;
        for (std::size_t ri = 0; ri < n_ratios; ++ri) {
          const BenchRow& row =
              rows[fi * n_ratios * 2 + ri * 2 + static_cast<std::size_t>(method)];
          curve.push_back(row.nmse);
          label = "beta=" + std::to_string(row.beta) + " " + row.method;
        }
        int inversions = 0;
        for (std::size_t i = 1; i < curve.size(); ++i) {
          if (curve[i] > curve[i - 1]) ++inversions;
        }
        std::string vals;
        for (double v : curve) vals += (vals.empty() ? "" : " ") + str(v);
        g.note(label + ": " + vals + " (" + std::to_string(inversions) +
               " inversions)");
        g.expect(inversions <= kMaxInversions,
                 label + " has " + std::to_string(inversions) + " inversions");
      }
    }
  });
}

// ---------------------------------------------------------------------------
// 10. Block-diagonal storage is exactly m*n/beta scalars.
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: storage claim", "[c10]") {
  run_gate(10, "storage-claim", [](Gate& g) {
    const std::vector<std::array<std::int64_t, 3>> configs = {
        {96, 256, 1},  {96, 256, 4},     {96, 256, 16},    {48, 256, 16},
        {128, 256, 16}, {32, 64, 8},     {6528, 16384, 16}, {6528, 16384, 64}};
    for (const auto& [m, n, beta] : configs) {
      const auto sensor = draw_sensor<double>(static_cast<int>(m),
                                              n, static_cast<int>(beta), 17);
      g.expect(sensor.stored_scalars() == m * n / beta,
               "m=" + std::to_string(m) + " n=" + std::to_string(n) +
                   " beta=" + std::to_string(beta) + ": stored " +
                   std::to_string(sensor.stored_scalars()));
    }
    const auto cplx = draw_sensor<std::complex<double>>(96, 256, 16, 18);
    g.expect(cplx.stored_scalars() == 96 * 256 / 16,
             "complex sensor stored-scalar count");
    g.note(std::to_string(configs.size() + 1) +
           " configurations, including the 6528x16384 grids");
  });
}

// ---------------------------------------------------------------------------
// 11. Timing trends at the large profile: parallel standard-BCS gets faster
//     from beta=16 to beta=64, and serial-BCS costs more than parallel
//     standard-BCS at equal beta.
// ---------------------------------------------------------------------------
TEST_CASE("acceptance: timing trends", "[c11]") {
  run_gate(11, "timing-trends", [](Gate& g) {
    const ExperimentConfig cfg = paper_profile();
    const TrainedModel model = train_model<std::complex<double>>(cfg);
    const auto rows = run_timing<std::complex<double>>(cfg, model);
    // timing_factor_sets yield betas {16, 64} x {parallel, serial-solve,
    // serial-bcs}.
    const TimingRow& par16 = rows[0];
    const TimingRow& ser16 = rows[2];
    const TimingRow& par64 = rows[3];
    const TimingRow& ser64 = rows[5];
    g.note("parallel standard-bcs: beta=16 " + str(par16.wall_ms) +
           " ms, beta=64 " + str(par64.wall_ms) + " ms");
    g.note("serial-bcs: beta=16 " + str(ser16.wall_ms) + " ms, beta=64 " +
           str(ser64.wall_ms) + " ms");
    g.expect(par16.method == "standard-bcs-parallel" &&
                 ser16.method == "serial-bcs",
             "unexpected row layout");
    g.expect(par64.wall_ms < par16.wall_ms,
             "parallel standard-bcs did not speed up from beta=16 to 64");
    g.expect(ser16.wall_ms > par16.wall_ms,
             "serial-bcs not slower than parallel standard-bcs at beta=16");
    g.expect(ser64.wall_ms > par64.wall_ms,
             "serial-bcs not slower than parallel standard-bcs at beta=64");
  });
}
