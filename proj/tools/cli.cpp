#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "psdsos/baselines.hpp"
#include "psdsos/certify.hpp"
#include "psdsos/datasets.hpp"
#include "psdsos/errors.hpp"
#include "psdsos/experiments.hpp"
#include "psdsos/io.hpp"
#include "psdsos/modelselect.hpp"
#include "psdsos/psdreg.hpp"

namespace psdsos::cli {
namespace {

using json = nlohmann::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string kernel = "gaussian";
  std::optional<double> sigma;
  double lambda1 = 0.0;
  double lambda2 = 1e-3;
  double rho = 1e-3;
  double tol = 1e-10;
  int max_iters = 50000;
  std::uint64_t seed = 0;
  std::string grid_file;
  int nystrom_rank = 0;
  int workers = 1;
  std::string out;

  std::string input;
  std::string second;  // queries file, or the data file for cv
  std::string kind;
  std::string representation = "approximate";
  std::string model_out;

  // certificate
  std::optional<double> radius;
  std::vector<double> lo, hi;
  int probes = 0;
  int order = 1;
  double algebra = 1.0;
  std::optional<double> deriv;
  double fd_step = 1e-3;
  bool lambda_max_form = false;

  // gen
  std::optional<int> n;
  double noise = 0.1;
  int dim = 1;
  double a = 1.0;
  double b = 2.0;
  bool rank_one = false;

  // benchmark
  std::vector<int> dims{1, 2};
  std::vector<double> noise_levels{0.1, 0.3};
  std::vector<int> sizes{10, 20, 40};
  int seeds = 10;
  int test_points = 10000;
  bool no_certify = false;
  double bench_tol = 1e-6;
  int bench_max_iters = 400;
  int bench_rank = 25;
};

std::string env_name(const std::string& flag) {
  std::string out = "PSDSOS_";
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

template <class T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& var, const std::string& help) {
  return app->add_option("--" + name, var, help)->envname(env_name(name));
}

void kernel_flags(CLI::App* app, Options& o) {
  flag(app, "kernel", o.kernel, "kernel family")->check(CLI::IsMember({"gaussian", "exponential"}));
  flag(app, "sigma", o.sigma, "kernel bandwidth");
}

void solver_flags(CLI::App* app, Options& o) {
  flag(app, "tol", o.tol, "solver tolerance on the relative duality gap");
  flag(app, "max-iters", o.max_iters, "solver iteration budget");
}

void certificate_flags(CLI::App* app, Options& o) {
  flag(app, "radius", o.radius, "domain radius for the fill-distance precondition");
  flag(app, "lo", o.lo, "lower corner of the certified box (default: grid minimum)")->delimiter(',');
  flag(app, "hi", o.hi, "upper corner of the certified box (default: grid maximum)")->delimiter(',');
  flag(app, "probes", o.probes, "probe points per axis");
  flag(app, "order", o.order, "smoothness order m");
  flag(app, "algebra-const", o.algebra, "constant M of the product inequality");
  flag(app, "deriv-const", o.deriv, "kernel derivative constant D_m (default: Gaussian bound)");
  flag(app, "fd-step", o.fd_step, "finite-difference step of the seminorm estimate");
  app->add_flag("--lambda-max-form", o.lambda_max_form, "use lambda_max(B) in place of tr B")
      ->envname("PSDSOS_LAMBDA_MAX_FORM");
}

KernelSpec kernel_of(const Options& o) {
  if (!o.sigma) throw UsageError("--sigma is required for the " + o.kernel + " kernel");
  return KernelSpec(parse_kernel_family(o.kernel), *o.sigma);
}

json report_json(const SolveReport& r) {
  return {{"dual_objective", r.dual_objective}, {"primal_objective", r.primal_objective},
          {"gap", r.gap},                       {"iterations", r.iterations},
          {"converged", r.converged},           {"wall_time", r.wall_time},
          {"max_constraint_residual", r.max_constraint_residual}};
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty())
    out << text;
  else
    write_text(path, text);
}

std::vector<std::string> matrix_columns(int d) {
  std::vector<std::string> names;
  for (int r = 1; r <= d; ++r)
    for (int c = 1; c <= d; ++c) names.push_back("m" + std::to_string(r) + std::to_string(c));
  return names;
}

CertificateReport certify_model(const ConvexModel& model, const Options& o) {
  const auto p = model.input_dim();
  Vec lo = model.grid.colwise().minCoeff().transpose();
  Vec hi = model.grid.colwise().maxCoeff().transpose();
  if (!o.lo.empty()) {
    if (static_cast<Eigen::Index>(o.lo.size()) != p) throw UsageError("--lo needs one value per input dimension");
    lo = Eigen::Map<const Vec>(o.lo.data(), p);
  }
  if (!o.hi.empty()) {
    if (static_cast<Eigen::Index>(o.hi.size()) != p) throw UsageError("--hi needs one value per input dimension");
    hi = Eigen::Map<const Vec>(o.hi.data(), p);
  }
  if ((hi - lo).minCoeff() < 0.0) throw UsageError("--lo must not exceed --hi");
  const int per_axis = o.probes > 0 ? o.probes : (p == 1 ? 401 : (p == 2 ? 41 : 11));
  const double radius = o.radius ? *o.radius : 0.5 * (hi - lo).maxCoeff();
  SmoothnessConstants c;
  c.m = o.order;
  c.M = o.algebra;
  c.D_m = o.deriv ? *o.deriv : gaussian_derivative_bound(o.order, model.kernel.sigma);
  return convexity_deficit(model, c, box_probes(lo, hi, per_axis), radius, o.fd_step, o.lambda_max_form);
}

GridSpec parse_grid(const std::string& text, GridSpec grid) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("grid file: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("grid file: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "lambda1")
        grid.lambda1 = value.get<std::vector<double>>();
      else if (key == "lambda2")
        grid.lambda2 = value.get<std::vector<double>>();
      else if (key == "rho")
        grid.rho = value.get<std::vector<double>>();
      else if (key == "sigma")
        grid.sigma = value.get<std::vector<double>>();
      else if (key == "folds")
        grid.folds = value.get<int>();
      else if (key == "loo")
        grid.loo = value.get<bool>();
      else if (key == "seed")
        grid.seed = value.get<std::uint64_t>();
      else
        throw ParseError("grid file: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ParseError("grid file: bad value for '" + key + "': " + e.what());
    }
  }
  validate(grid);
  return grid;
}

int fit_psd(const Options& o, std::ostream& out) {
  const KernelSpec k = kernel_of(o);
  const PsdDataset data = parse_psd_csv(read_text(o.input));
  validate(data);
  PsdFit fit = solve_dual(data, k, RegularizerSpec(o.lambda1, o.lambda2), {o.tol, o.max_iters});
  fit.model.hyperparameters["lambda1"] = o.lambda1;
  fit.model.hyperparameters["lambda2"] = o.lambda2;
  save_model(fit.model, o.out);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Mat diff = evaluate(fit.model, data.inputs.row(i).transpose()) - data.targets[static_cast<std::size_t>(i)];
    worst = std::max(worst, diff.norm());
  }
  json j = report_json(fit.report);
  j["max_training_error"] = worst;
  out << j.dump(1) << "\n";
  return fit.report.converged ? ok : not_converged;
}

int fit_convex(const Options& o, std::ostream& out) {
  const KernelSpec k = kernel_of(o);
  if (k.family != KernelFamily::gaussian) {
    throw UsageError("convex fitting needs second derivatives of the kernel at the diagonal, which the " + o.kernel +
                     " kernel lacks; use --kernel gaussian");
  }
  const ScalarDataset data = parse_scalar_csv(read_text(o.input));
  validate(data);
  const Representation rep = parse_representation(o.representation);
  if (rep == Representation::exact && o.nystrom_rank > 0) {
    throw UsageError("--nystrom-rank applies to the approximate representation only");
  }
  const Mat grid = o.grid_file.empty() ? Mat() : parse_query_csv(read_text(o.grid_file));
  const ConvexFitParams params{o.rho, o.lambda1, o.lambda2};
  const SolverOptions solver{o.tol, o.max_iters};
  ConvexFit fit = rep == Representation::exact
                      ? fit_exact(data, grid, k, params, solver)
                      : fit_approx(data, grid, k, params, {o.nystrom_rank, LandmarkRule::uniform_random, o.seed}, solver);
  save_convex_model(fit.model, o.out);
  json j = report_json(fit.report);
  j["training_mse"] = (predict_scalar(fit.model, data.inputs) - data.y).squaredNorm() / static_cast<double>(data.n());
  int code = fit.report.converged ? ok : not_converged;
  if (o.radius) {
    const CertificateReport cert = certify_model(fit.model, o);
    j["certificate"] = json::parse(to_json(cert));
    if (!cert.valid && code == ok) code = precondition;
  }
  out << j.dump(1) << "\n";
  return code;
}

std::string model_kind(const std::string& text) {
  try {
    const json j = json::parse(text);
    return j.at("kind").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

int predict_cmd(const Options& o, std::ostream& out) {
  const std::string text = read_text(o.input);
  const Mat queries = parse_query_csv(read_text(o.second));
  const std::string kind = model_kind(text);
  if (kind == "psd") {
    const SosModel model = deserialize(text);
    const auto values = predict(model, queries);
    const int d = model.factor.d;
    Mat flat(queries.rows(), d * d);
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
      const Mat& v = values[static_cast<std::size_t>(i)];
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) flat(i, r * d + c) = v(r, c);
    }
    emit(o.out, table_csv(queries, flat, matrix_columns(d)), out);
  } else if (kind == "convex") {
    const ConvexModel model = deserialize_convex(text);
    emit(o.out, table_csv(queries, predict_scalar(model, queries), {"y"}), out);
  } else {
    throw ParseError("model file: unknown kind '" + kind + "'");
  }
  return ok;
}

int certify_cmd(const Options& o, std::ostream& out) {
  const std::string text = read_text(o.input);
  if (model_kind(text) != "convex") throw UsageError("certify expects a convex regression model");
  const CertificateReport cert = certify_model(deserialize_convex(text), o);
  emit(o.out, to_json(cert) + "\n", out);
  return cert.valid ? ok : precondition;
}

int gen_cmd(const Options& o, std::ostream& out) {
  if (o.kind == "bures") {
    BuresSpec spec = default_bures_spec(o.n.value_or(12), o.rank_one);
    emit(o.out, psd_csv(gen_bures(spec)), out);
  } else {
    ConvexRegSpec spec;
    spec.a = o.a;
    spec.b = o.b;
    spec.p = o.dim;
    spec.n = o.n.value_or(10);
    spec.noise = o.noise;
    spec.seed = o.seed;
    if (spec.p < 1 || spec.n < 1 || spec.noise < 0.0 || !(spec.b > 0.0)) throw UsageError("bad generator settings");
    emit(o.out, scalar_csv(gen_convex_samples(spec)), out);
  }
  return ok;
}

int cv_cmd(const Options& o, std::ostream& out, const CLI::App& app) {
  const bool seeded = app.count("--seed") > 0 || std::getenv("PSDSOS_SEED") != nullptr;
  auto load_grid = [&](GridSpec base) {
    if (!o.grid_file.empty()) base = parse_grid(read_text(o.grid_file), base);
    if (seeded) base.seed = o.seed;
    return base;
  };
  json j;
  int code = ok;
  if (o.kind == "psd") {
    const PsdDataset data = parse_psd_csv(read_text(o.second));
    validate(data);
    const PsdCvFit fit =
        cv_psd(data, parse_kernel_family(o.kernel), load_grid(psd_task_grid()), {o.tol, o.max_iters}, o.workers);
    if (!o.model_out.empty()) save_model(fit.fit.model, o.model_out);
    j["cv"] = json::parse(to_json(fit.cv));
    j["report"] = report_json(fit.fit.report);
    code = fit.fit.report.converged ? ok : not_converged;
  } else if (o.kind == "convex") {
    const ScalarDataset data = parse_scalar_csv(read_text(o.second));
    validate(data);
    if (o.kernel != "gaussian") throw UsageError("convex fitting needs --kernel gaussian");
    ConvexCvOptions opts;
    opts.representation = parse_representation(o.representation);
    opts.nystrom = {o.nystrom_rank, LandmarkRule::uniform_random, o.seed};
    opts.solver = {o.tol, o.max_iters};
    const ConvexCvFit fit = cv_convex(data, load_grid(convex_task_grid()), opts, o.workers);
    if (!o.model_out.empty()) save_convex_model(fit.fit.model, o.model_out);
    j["cv"] = json::parse(to_json(fit.cv));
    j["report"] = report_json(fit.fit.report);
    code = fit.fit.report.converged ? ok : not_converged;
  } else {
    const ScalarDataset data = parse_scalar_csv(read_text(o.second));
    validate(data);
    if (!o.model_out.empty()) throw UsageError("--model-out is not available for krr");
    const KrrCvFit fit = cv_krr(data, load_grid(convex_task_grid()), o.workers);
    j["cv"] = json::parse(to_json(fit.cv));
  }
  emit(o.out, j.dump(1) + "\n", out);
  return code;
}

int benchmark_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  BenchmarkConfig cfg;
  cfg.dims = o.dims;
  cfg.noise = o.noise_levels;
  cfg.sizes = o.sizes;
  cfg.seeds = o.seeds;
  cfg.test_points = o.test_points;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.solver = {o.bench_tol, o.bench_max_iters};
  cfg.nystrom_rank = o.bench_rank;
  cfg.certify = !o.no_certify;
  if (cfg.seeds < 1 || cfg.test_points < 1 || cfg.workers < 1) throw UsageError("bad benchmark settings");
  for (int p : cfg.dims)
    if (p < 1) throw UsageError("--dims entries must be positive");
  for (int n : cfg.sizes)
    if (n < 2) throw UsageError("--sizes entries must be at least 2");

  const std::filesystem::path dir = o.out.empty() ? "benchmark" : o.out;
  std::filesystem::create_directories(dir);
  const auto rows = run_benchmark(cfg, [&err](const BenchmarkRow& r) {
    err << "p=" << r.p << " noise=" << r.noise << " n=" << r.n << " seed=" << r.seed_index
        << " sos=" << r.mse_sos << " krr=" << r.mse_krr << " pwl=" << r.mse_pwl << "\n";
  });
  const std::string summary = cells_csv(summarize(rows));
  write_text((dir / "results.csv").string(), rows_csv(rows));
  write_text((dir / "summary.csv").string(), summary);
  write_text((dir / "plot_mse.py").string(), plot_script("summary.csv"));
  out << summary;
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Kernel sum-of-squares regression for PSD-valued and convex functions", "psdsos");
  app.require_subcommand(1);
  Options o;

  auto* fit_psd_app = app.add_subcommand("fit-psd", "fit a PSD-valued model to x1..xp,m11..mdd data");
  fit_psd_app->add_option("data", o.input, "PSD dataset CSV")->required();
  kernel_flags(fit_psd_app, o);
  flag(fit_psd_app, "lambda1", o.lambda1, "trace weight");
  flag(fit_psd_app, "lambda2", o.lambda2, "Frobenius weight");
  solver_flags(fit_psd_app, o);
  flag(fit_psd_app, "out", o.out, "model file")->required();

  auto* fit_cvx = app.add_subcommand("fit-convex", "fit a convex function to x1..xp,y data");
  fit_cvx->add_option("data", o.input, "scalar dataset CSV")->required();
  kernel_flags(fit_cvx, o);
  flag(fit_cvx, "lambda1", o.lambda1, "trace weight");
  flag(fit_cvx, "lambda2", o.lambda2, "Frobenius weight");
  flag(fit_cvx, "rho", o.rho, "RKHS norm weight");
  solver_flags(fit_cvx, o);
  flag(fit_cvx, "seed", o.seed, "landmark seed");
  flag(fit_cvx, "grid-file", o.grid_file, "constraint points CSV (x1..xp), default the training inputs");
  flag(fit_cvx, "nystrom-rank", o.nystrom_rank, "landmarks for the constraint features, 0 for all");
  flag(fit_cvx, "representation", o.representation, "approximate or exact")
      ->check(CLI::IsMember({"approximate", "exact"}));
  certificate_flags(fit_cvx, o);
  flag(fit_cvx, "out", o.out, "model file")->required();

  auto* predict_app = app.add_subcommand("predict", "evaluate a model at query points");
  predict_app->add_option("model", o.input, "model file")->required();
  predict_app->add_option("queries", o.second, "query CSV (x1..xp)")->required();
  flag(predict_app, "out", o.out, "output CSV, default stdout");

  auto* certify_app = app.add_subcommand("certify", "convexity deficit of a fitted convex model");
  certify_app->add_option("model", o.input, "model file")->required();
  certificate_flags(certify_app, o);
  flag(certify_app, "out", o.out, "report file, default stdout");

  auto* gen_app = app.add_subcommand("gen", "generate a dataset");
  gen_app->add_option("kind", o.kind, "bures or convex")->required()->check(CLI::IsMember({"bures", "convex"}));
  flag(gen_app, "n", o.n, "number of samples");
  flag(gen_app, "seed", o.seed, "random seed");
  flag(gen_app, "noise", o.noise, "noise standard deviation");
  flag(gen_app, "dim", o.dim, "input dimension");
  flag(gen_app, "a", o.a, "oscillation of the target");
  flag(gen_app, "b", o.b, "half-width of the input cube");
  gen_app->add_flag("--rank-one", o.rank_one, "rank-one geodesic endpoints")->envname("PSDSOS_RANK_ONE");
  flag(gen_app, "out", o.out, "output CSV, default stdout");

  auto* cv_app = app.add_subcommand("cv", "cross-validated hyperparameter search");
  cv_app->add_option("task", o.kind, "psd, convex or krr")->required()->check(CLI::IsMember({"psd", "convex", "krr"}));
  cv_app->add_option("data", o.second, "dataset CSV")->required();
  flag(cv_app, "kernel", o.kernel, "kernel family")->check(CLI::IsMember({"gaussian", "exponential"}));
  flag(cv_app, "grid-file", o.grid_file, "JSON grid: lambda1, lambda2, rho, sigma lists, folds, loo, seed");
  flag(cv_app, "representation", o.representation, "approximate or exact")
      ->check(CLI::IsMember({"approximate", "exact"}));
  flag(cv_app, "nystrom-rank", o.nystrom_rank, "landmarks for the constraint features, 0 for all");
  solver_flags(cv_app, o);
  flag(cv_app, "seed", o.seed, "fold seed");
  flag(cv_app, "workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  flag(cv_app, "model-out", o.model_out, "model refitted at the selected cell");
  flag(cv_app, "out", o.out, "CV report, default stdout");

  auto* bench_app = app.add_subcommand("benchmark", "SoS vs kernel ridge vs max-affine regression");
  flag(bench_app, "dims", o.dims, "input dimensions")->delimiter(',');
  flag(bench_app, "noise-levels", o.noise_levels, "noise standard deviations")->delimiter(',');
  flag(bench_app, "sizes", o.sizes, "sample counts")->delimiter(',');
  flag(bench_app, "seeds", o.seeds, "runs per cell");
  flag(bench_app, "test-points", o.test_points, "test samples per run");
  flag(bench_app, "seed", o.seed, "base seed");
  flag(bench_app, "workers", o.workers, "worker threads");
  flag(bench_app, "tol", o.bench_tol, "solver tolerance");
  flag(bench_app, "max-iters", o.bench_max_iters, "solver iteration budget");
  flag(bench_app, "nystrom-rank", o.bench_rank, "landmarks when n exceeds it, 0 for none");
  bench_app->add_flag("--no-certify", o.no_certify, "skip convexity certificates");
  flag(bench_app, "out", o.out, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }
  try {
    if (fit_psd_app->parsed()) return fit_psd(o, out);
    if (fit_cvx->parsed()) return fit_convex(o, out);
    if (predict_app->parsed()) return predict_cmd(o, out);
    if (certify_app->parsed()) return certify_cmd(o, out);
    if (gen_app->parsed()) return gen_cmd(o, out);
    if (cv_app->parsed()) return cv_cmd(o, out, *cv_app);
    if (bench_app->parsed()) return benchmark_cmd(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }
  return usage;
}

}  // namespace psdsos::cli
