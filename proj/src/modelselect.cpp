#include "psdsos/modelselect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "psdsos/errors.hpp"
#include "psdsos/rng.hpp"

namespace psdsos {

std::vector<int> kfold_split(int n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) throw InvalidArgument("kfold_split: need 2 <= k <= n");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.index(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (int pos = 0; pos < n; ++pos) fold[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos % k;
  return fold;
}

void validate(const GridSpec& grid) {
  if (grid.lambda1.empty() || grid.lambda2.empty() || grid.rho.empty() || grid.sigma.empty()) {
    throw InvalidArgument("grid: every candidate list must be nonempty");
  }
  if (!grid.loo && grid.folds < 2) throw InvalidArgument("grid: need folds >= 2 or leave-one-out");
  for (double v : grid.sigma) {
    if (!(v > 0.0)) throw InvalidArgument("grid: sigma candidates must be positive");
  }
  for (const auto* list : {&grid.lambda1, &grid.lambda2, &grid.rho}) {
    for (double v : *list) {
      if (!(v >= 0.0)) throw InvalidArgument("grid: regularization candidates must be non-negative");
    }
  }
}

std::vector<GridCell> expand(const GridSpec& grid) {
  validate(grid);
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<GridCell> cells;
  for (double l2 : sorted(grid.lambda2))
    for (double l1 : sorted(grid.lambda1))
      for (double rho : sorted(grid.rho))
        for (double s : sorted(grid.sigma)) cells.push_back({l1, l2, rho, s});
  return cells;
}

GridSpec psd_task_grid() {
  GridSpec g;
  g.lambda1.clear();
  g.lambda2.clear();
  for (int e = 0; e <= 8; ++e) {
    g.lambda1.push_back(std::pow(10.0, -e));
    g.lambda2.push_back(std::pow(10.0, -e));
  }
  g.lambda1.push_back(0.0);
  g.sigma = {1.0, 0.1, 0.01};
  g.loo = true;
  return g;
}

GridSpec convex_task_grid(std::vector<double> rho) {
  GridSpec g;
  g.lambda2.clear();
  for (int e = 3; e <= 7; ++e) g.lambda2.push_back(std::pow(10.0, -e));
  g.lambda1 = {0.0};
  g.rho = std::move(rho);
  g.sigma = {std::sqrt(10.0), std::sqrt(5.0), 1.0};
  g.folds = 5;
  return g;
}

CvResult grid_search(const CellLoss& loss, int n, const GridSpec& grid, int workers) {
  CvResult out;
  out.cells = expand(grid);
  const int k = grid.loo ? n : grid.folds;
  out.folds = kfold_split(n, k, grid.seed);

  std::vector<std::vector<Eigen::Index>> train(static_cast<std::size_t>(k)), val(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    const int f = out.folds[static_cast<std::size_t>(i)];
    for (int g = 0; g < k; ++g) (g == f ? val : train)[static_cast<std::size_t>(g)].push_back(i);
  }

  const std::size_t cells = out.cells.size();
  const std::size_t items = cells * static_cast<std::size_t>(k);
  std::vector<double> scores(items, std::numeric_limits<double>::infinity());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t it = next++; it < items; it = next++) {
      const std::size_t c = it / static_cast<std::size_t>(k);
      const std::size_t f = it % static_cast<std::size_t>(k);
      try {
        const double v = loss(out.cells[c], train[f], val[f]);
        if (std::isfinite(v)) scores[it] = v;
      } catch (const std::exception&) {
        // scored +inf
      }
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(items)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  out.mean_loss.assign(cells, 0.0);
  out.std_loss.assign(cells, 0.0);
  out.failures.assign(cells, 0);
  bool any = false;
  for (std::size_t c = 0; c < cells; ++c) {
    double sum = 0.0, sum2 = 0.0;
    for (int f = 0; f < k; ++f) {
      const double v = scores[c * static_cast<std::size_t>(k) + static_cast<std::size_t>(f)];
      if (!std::isfinite(v)) ++out.failures[c];
      sum += v;
      sum2 += v * v;
    }
    if (out.failures[c] > 0) {
      out.mean_loss[c] = out.std_loss[c] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double mean = sum / k;
    out.mean_loss[c] = mean;
    out.std_loss[c] = std::sqrt(std::max(0.0, sum2 / k - mean * mean));
    if (!any || mean < out.mean_loss[out.selected]) out.selected = c;
    any = true;
  }
  if (!any) throw Error("grid search: every cell failed on at least one fold");
  return out;
}

PsdCvFit cv_psd(const PsdDataset& data, KernelFamily family, const GridSpec& grid, const SolverOptions& opts,
                int workers) {
  validate(data);
  auto loss = [&](const GridCell& c, const std::vector<Eigen::Index>& tr, const std::vector<Eigen::Index>& va) {
    const PsdDataset train = data.subset(tr);
    const PsdFit fit = solve_dual(train, KernelSpec(family, c.sigma), RegularizerSpec(c.lambda1, c.lambda2), opts);
    double err = 0.0;
    for (Eigen::Index i : va) {
      err += (evaluate(fit.model, data.inputs.row(i).transpose()) - data.targets[static_cast<std::size_t>(i)])
                 .squaredNorm();
    }
    return err / static_cast<double>(va.size());
  };
  PsdCvFit out;
  out.cv = grid_search(loss, static_cast<int>(data.n()), grid, workers);
  const GridCell& c = out.cv.cells[out.cv.selected];
  out.fit = solve_dual(data, KernelSpec(family, c.sigma), RegularizerSpec(c.lambda1, c.lambda2), opts);
  return out;
}

namespace {

ConvexFit fit_convex_cell(const ScalarDataset& data, const GridCell& c, const ConvexCvOptions& opts) {
  const KernelSpec kernel(KernelFamily::gaussian, c.sigma);
  ConvexFitParams params;
  params.rho = c.rho;
  params.lambda1 = c.lambda1;
  params.lambda2 = c.lambda2;
  if (opts.representation == Representation::exact) return fit_exact(data, Mat(), kernel, params, opts.solver);
  NystromSpec ny = opts.nystrom;
  if (ny.rank >= data.n()) ny.rank = 0;
  return fit_approx(data, Mat(), kernel, params, ny, opts.solver);
}

}  // namespace

ConvexCvFit cv_convex(const ScalarDataset& data, const GridSpec& grid, const ConvexCvOptions& opts, int workers) {
  validate(data);
  auto loss = [&](const GridCell& c, const std::vector<Eigen::Index>& tr, const std::vector<Eigen::Index>& va) {
    const ConvexFit fit = fit_convex_cell(data.subset(tr), c, opts);
    const ScalarDataset held = data.subset(va);
    return (predict_scalar(fit.model, held.inputs) - held.y).squaredNorm() / static_cast<double>(held.n());
  };
  ConvexCvFit out;
  out.cv = grid_search(loss, static_cast<int>(data.n()), grid, workers);
  out.fit = fit_convex_cell(data, out.cv.cells[out.cv.selected], opts);
  return out;
}

KrrCvFit cv_krr(const ScalarDataset& data, const GridSpec& grid, int workers) {
  validate(data);
  auto loss = [&](const GridCell& c, const std::vector<Eigen::Index>& tr, const std::vector<Eigen::Index>& va) {
    const KrrModel m = krr_fit(data.subset(tr), KernelSpec(KernelFamily::gaussian, c.sigma), c.rho);
    const ScalarDataset held = data.subset(va);
    return (krr_predict(m, held.inputs) - held.y).squaredNorm() / static_cast<double>(held.n());
  };
  KrrCvFit out;
  out.cv = grid_search(loss, static_cast<int>(data.n()), grid, workers);
  const GridCell& c = out.cv.cells[out.cv.selected];
  out.model = krr_fit(data, KernelSpec(KernelFamily::gaussian, c.sigma), c.rho);
  return out;
}

std::string to_json(const CvResult& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    const auto& g = r.cells[c];
    nlohmann::json j{{"lambda1", g.lambda1}, {"lambda2", g.lambda2}, {"rho", g.rho}, {"sigma", g.sigma},
                     {"failures", r.failures[c]}};
    // JSON has no infinity
    j["mean_loss"] = std::isfinite(r.mean_loss[c]) ? nlohmann::json(r.mean_loss[c]) : nlohmann::json(nullptr);
    j["std_loss"] = std::isfinite(r.std_loss[c]) ? nlohmann::json(r.std_loss[c]) : nlohmann::json(nullptr);
    cells.push_back(std::move(j));
  }
  const auto& s = r.cells[r.selected];
  nlohmann::json out{{"cells", cells},
                     {"selected_index", r.selected},
                     {"selected", {{"lambda1", s.lambda1}, {"lambda2", s.lambda2}, {"rho", s.rho}, {"sigma", s.sigma}}},
                     {"folds", r.folds}};
  return out.dump(1);
}

}  // namespace psdsos
