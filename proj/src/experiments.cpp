#include "psdsos/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "psdsos/baselines.hpp"
#include "psdsos/certify.hpp"
#include "psdsos/datasets.hpp"
#include "psdsos/io.hpp"
#include "psdsos/modelselect.hpp"

namespace psdsos {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

double mse(const Vec& pred, const Vec& y) { return (pred - y).squaredNorm() / static_cast<double>(y.size()); }

}  // namespace

BenchmarkRow run_benchmark_case(const BenchmarkConfig& cfg, int p, double noise, int n, int seed_index) {
  const auto start = std::chrono::steady_clock::now();
  BenchmarkRow row;
  row.p = p;
  row.noise = noise;
  row.n = n;
  row.seed_index = seed_index;

  std::uint64_t key = mix(cfg.seed, static_cast<std::uint64_t>(p));
  key = mix(key, static_cast<std::uint64_t>(std::llround(noise * 1e6)));
  key = mix(key, static_cast<std::uint64_t>(n));
  key = mix(key, static_cast<std::uint64_t>(seed_index));

  ConvexRegSpec spec;
  spec.a = cfg.a;
  spec.b = cfg.b;
  spec.p = p;
  spec.n = n;
  spec.noise = noise;
  spec.seed = key;
  const ScalarDataset train = gen_convex_samples(spec);
  ConvexRegSpec test_spec = spec;
  test_spec.n = cfg.test_points;
  test_spec.seed = mix(key, 1);
  const ScalarDataset test = gen_convex_samples(test_spec);

  GridSpec sos_grid = convex_task_grid(cfg.sos_rho);
  sos_grid.seed = mix(key, 2);
  ConvexCvOptions opts;
  opts.solver = cfg.solver;
  opts.nystrom.rank = (cfg.nystrom_rank > 0 && n > cfg.nystrom_rank) ? cfg.nystrom_rank : 0;
  opts.nystrom.seed = mix(key, 3);
  const ConvexCvFit sos = cv_convex(train, sos_grid, opts);
  const GridCell& cell = sos.cv.cells[sos.cv.selected];
  row.mse_sos = mse(predict_scalar(sos.fit.model, test.inputs), test.y);
  row.lambda2 = cell.lambda2;
  row.rho = cell.rho;
  row.sigma = cell.sigma;
  row.sos_converged = sos.fit.report.converged;

  GridSpec krr_grid = sos_grid;
  krr_grid.lambda2 = {0.0};
  krr_grid.rho = cfg.krr_rho;
  const KrrCvFit krr = cv_krr(train, krr_grid);
  row.mse_krr = mse(krr_predict(krr.model, test.inputs), test.y);

  PwlOptions pwl_opts;
  pwl_opts.tol = cfg.pwl_tol;
  const PwlFit pwl = pwl_fit(train, pwl_opts);
  row.mse_pwl = mse(pwl_predict(pwl.model, test.inputs), test.y);
  row.pwl_converged = pwl.converged;

  if (cfg.certify) {
    const Vec lo = Vec::Constant(p, -cfg.b);
    const Vec hi = Vec::Constant(p, cfg.b);
    const Mat probes = box_probes(lo, hi, p == 1 ? cfg.probes_1d : cfg.probes_2d);
    SmoothnessConstants c;
    c.m = 1;
    c.D_m = gaussian_derivative_bound(1, cell.sigma);
    const CertificateReport rep = convexity_deficit(sos.fit.model, c, probes, cfg.b);
    row.eta = rep.eta;
    row.certificate_valid = rep.valid;
    row.min_hessian_eig = empirical_min_eig([&](const Vec& x) { return hessian_at(sos.fit.model, x); }, probes);
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg,
                                        const std::function<void(const BenchmarkRow&)>& progress) {
  std::vector<std::tuple<int, double, int, int>> cases;
  for (int p : cfg.dims)
    for (double noise : cfg.noise)
      for (int n : cfg.sizes)
        for (int s = 0; s < cfg.seeds; ++s) cases.emplace_back(p, noise, n, s);

  std::vector<BenchmarkRow> rows(cases.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      try {
        const auto& [p, noise, n, s] = cases[i];
        rows[i] = run_benchmark_case(cfg, p, noise, n, s);
        if (progress) {
          std::lock_guard lock(report);
          progress(rows[i]);
        }
      } catch (...) {
        std::lock_guard lock(report);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(cfg.workers, static_cast<int>(cases.size())));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<BenchmarkCell> summarize(const std::vector<BenchmarkRow>& rows) {
  std::map<std::tuple<int, double, int>, std::vector<const BenchmarkRow*>> groups;
  for (const auto& r : rows) groups[{r.p, r.noise, r.n}].push_back(&r);
  std::vector<BenchmarkCell> out;
  for (const auto& [key, members] : groups) {
    BenchmarkCell c;
    std::tie(c.p, c.noise, c.n) = key;
    c.runs = static_cast<int>(members.size());
    auto stats = [&](double BenchmarkRow::*field, double& mean, double& sd) {
      double s = 0.0, s2 = 0.0;
      for (const auto* r : members) {
        s += r->*field;
        s2 += (r->*field) * (r->*field);
      }
      mean = s / c.runs;
      sd = std::sqrt(std::max(0.0, s2 / c.runs - mean * mean));
    };
    stats(&BenchmarkRow::mse_sos, c.mean_sos, c.std_sos);
    stats(&BenchmarkRow::mse_krr, c.mean_krr, c.std_krr);
    stats(&BenchmarkRow::mse_pwl, c.mean_pwl, c.std_pwl);
    out.push_back(c);
  }
  return out;
}

std::string rows_csv(const std::vector<BenchmarkRow>& rows) {
  std::string out =
      "p,noise,n,seed,method,mse,lambda2,rho,sigma,converged,min_hessian_eig,eta,certificate_valid,seconds\n";
  auto f = format_number;
  for (const auto& r : rows) {
    const std::string head = std::to_string(r.p) + "," + f(r.noise) + "," + std::to_string(r.n) + "," +
                             std::to_string(r.seed_index) + ",";
    out += head + "sos," + f(r.mse_sos) + "," + f(r.lambda2) + "," + f(r.rho) + "," + f(r.sigma) + "," +
           (r.sos_converged ? "1" : "0") + "," + f(r.min_hessian_eig) + "," + f(r.eta) + "," +
           (r.certificate_valid ? "1" : "0") + "," + f(r.seconds) + "\n";
    out += head + "krr," + f(r.mse_krr) + ",,,,,,,,\n";
    out += head + "pwl," + f(r.mse_pwl) + ",,,," + (r.pwl_converged ? "1" : "0") + ",,,,\n";
  }
  return out;
}

std::string cells_csv(const std::vector<BenchmarkCell>& cells) {
  std::string out = "p,noise,n,method,runs,mean_mse,std_mse\n";
  for (const auto& c : cells) {
    const std::string head = std::to_string(c.p) + "," + format_number(c.noise) + "," + std::to_string(c.n) + ",";
    const std::string runs = std::to_string(c.runs) + ",";
    out += head + "sos," + runs + format_number(c.mean_sos) + "," + format_number(c.std_sos) + "\n";
    out += head + "krr," + runs + format_number(c.mean_krr) + "," + format_number(c.std_krr) + "\n";
    out += head + "pwl," + runs + format_number(c.mean_pwl) + "," + format_number(c.std_pwl) + "\n";
  }
  return out;
}

std::string plot_script(const std::string& summary_csv_name) {
  return R"(import csv
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else ")" +
         summary_csv_name + R"("
series = defaultdict(list)
with open(path) as fh:
    for r in csv.DictReader(fh):
        series[(int(r["p"]), float(r["noise"]), r["method"])].append(
            (int(r["n"]), float(r["mean_mse"]), float(r["std_mse"])))

panels = sorted({(p, noise) for p, noise, _ in series})
fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.2), squeeze=False)
labels = {"sos": "kernel SoS", "krr": "kernel ridge", "pwl": "piecewise linear"}
for ax, (p, noise) in zip(axes[0], panels):
    for method in ("pwl", "krr", "sos"):
        pts = sorted(series.get((p, noise, method), []))
        if not pts:
            continue
        ns, means, sds = zip(*pts)
        ax.errorbar(ns, means, yerr=sds, marker="o", capsize=3, label=labels[method])
    ax.set_title(f"p={p}, noise={noise}")
    ax.set_xlabel("n")
    ax.set_ylabel("test MSE")
    ax.set_yscale("log")
axes[0][0].legend()
fig.tight_layout()
fig.savefig("mse.png", dpi=150)
)";
}

}  // namespace psdsos
