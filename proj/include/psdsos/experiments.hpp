#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "psdsos/report.hpp"

namespace psdsos {

/// Convex regression benchmark: SoS regression, kernel ridge regression and
/// max-affine regression on f_a data, over dims x noise levels x sizes x seeds.
struct BenchmarkConfig {
  std::vector<int> dims{1, 2};
  std::vector<double> noise{0.1, 0.3};
  std::vector<int> sizes{10, 20, 40};
  int seeds = 10;
  int test_points = 10000;
  double a = 1.0;
  double b = 2.0;
  std::uint64_t seed = 0;
  int workers = 1;
  SolverOptions solver{1e-6, 400};
  int nystrom_rank = 25;  ///< used when n exceeds it, 0 disables
  std::vector<double> sos_rho{1e-3, 1e-5};
  std::vector<double> krr_rho{1e-3, 1e-5};  ///< same grid as the SoS fits
  double pwl_tol = 1e-6;
  bool certify = true;
  int probes_1d = 401;  ///< probe grid points per axis in 1-D
  int probes_2d = 41;   ///< per axis in 2-D and above
};

struct BenchmarkRow {
  int p = 1;
  double noise = 0.0;
  int n = 0;
  int seed_index = 0;
  double mse_sos = 0.0;
  double mse_krr = 0.0;
  double mse_pwl = 0.0;
  double lambda2 = 0.0;
  double rho = 0.0;
  double sigma = 0.0;
  bool sos_converged = false;
  bool pwl_converged = false;
  double min_hessian_eig = 0.0;  ///< over the probe grid
  double eta = 0.0;
  bool certificate_valid = false;
  double seconds = 0.0;
};

struct BenchmarkCell {
  int p = 1;
  double noise = 0.0;
  int n = 0;
  int runs = 0;
  double mean_sos = 0.0, std_sos = 0.0;
  double mean_krr = 0.0, std_krr = 0.0;
  double mean_pwl = 0.0, std_pwl = 0.0;
};

/// One (p, noise, n, seed) run. Test MSE is measured on fresh noisy samples
/// from the same distribution.
BenchmarkRow run_benchmark_case(const BenchmarkConfig& cfg, int p, double noise, int n, int seed_index);

/// All runs, in (p, noise, n, seed) order. `progress` is called after each run.
std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg,
                                        const std::function<void(const BenchmarkRow&)>& progress = {});

std::vector<BenchmarkCell> summarize(const std::vector<BenchmarkRow>& rows);

std::string rows_csv(const std::vector<BenchmarkRow>& rows);
std::string cells_csv(const std::vector<BenchmarkCell>& cells);

/// Python/matplotlib script plotting mean MSE with std bars against n from
/// the summary CSV, one panel per (dimension, noise).
std::string plot_script(const std::string& summary_csv_name);

}  // namespace psdsos
