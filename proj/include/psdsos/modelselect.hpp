#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "psdsos/baselines.hpp"
#include "psdsos/cvxreg.hpp"
#include "psdsos/psdreg.hpp"

namespace psdsos {

/// Fold label in [0, k) for every index. A seeded shuffle followed by
/// round-robin labels, so fold sizes differ by at most one.
std::vector<int> kfold_split(int n, int k, std::uint64_t seed);

/// Candidate lists. Cells are enumerated with each list sorted in decreasing
/// order, lambda2 outermost, then lambda1, rho, sigma. Larger values regularize
/// more (a wider kernel is smoother), so earlier cells are the conservative ones.
struct GridSpec {
  std::vector<double> lambda1{0.0};
  std::vector<double> lambda2{1e-3};
  std::vector<double> rho{1e-3};
  std::vector<double> sigma{1.0};
  int folds = 5;
  bool loo = false;
  std::uint64_t seed = 0;
};

struct GridCell {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double rho = 0.0;
  double sigma = 1.0;
};

std::vector<GridCell> expand(const GridSpec& grid);
void validate(const GridSpec& grid);

/// Grid of the PSD task: lambda1 in {1, ..., 1e-8, 0}, lambda2 in {1, ..., 1e-8},
/// sigma in {1, 0.1, 0.01}, leave-one-out.
GridSpec psd_task_grid();

/// Grid of the convex task: lambda2 in {1e-3, ..., 1e-7}, sigma^2 in {10, 5, 1},
/// lambda1 = 0, the given rho candidates, 5 folds.
GridSpec convex_task_grid(std::vector<double> rho = {1e-3, 1e-5});

struct CvResult {
  std::vector<GridCell> cells;
  std::vector<double> mean_loss;  ///< +inf when any fold failed
  std::vector<double> std_loss;
  std::vector<int> failures;      ///< failed folds per cell
  std::size_t selected = 0;
  std::vector<int> folds;         ///< fold label per sample
};

/// Validation loss of one cell trained on `train` and scored on `val`.
/// Throwing marks the fold as failed.
using CellLoss = std::function<double(const GridCell& cell, const std::vector<Eigen::Index>& train,
                                      const std::vector<Eigen::Index>& val)>;

/// Evaluates every (cell, fold) pair on `workers` threads and selects the
/// smallest mean loss, ties to the earliest cell. Throws when every cell failed.
CvResult grid_search(const CellLoss& loss, int n, const GridSpec& grid, int workers = 1);

struct PsdCvFit {
  CvResult cv;
  PsdFit fit;
};

/// Mean squared Frobenius validation error; refits on all data at the selected cell.
PsdCvFit cv_psd(const PsdDataset& data, KernelFamily family, const GridSpec& grid, const SolverOptions& opts = {},
                int workers = 1);

struct ConvexCvOptions {
  Representation representation = Representation::approximate;
  NystromSpec nystrom;
  SolverOptions solver;
};

struct ConvexCvFit {
  CvResult cv;
  ConvexFit fit;
};

/// Mean squared validation error, constraint grid = training inputs of each fold.
ConvexCvFit cv_convex(const ScalarDataset& data, const GridSpec& grid, const ConvexCvOptions& opts = {},
                      int workers = 1);

struct KrrCvFit {
  CvResult cv;
  KrrModel model;
};

/// Gaussian kernel ridge regression over the rho and sigma lists.
KrrCvFit cv_krr(const ScalarDataset& data, const GridSpec& grid, int workers = 1);

std::string to_json(const CvResult& result);

}  // namespace psdsos
