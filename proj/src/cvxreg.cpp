#include "psdsos/cvxreg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json_matrix.hpp"
#include "psdsos/agd.hpp"
#include "psdsos/errors.hpp"
#include "psdsos/psdlinalg.hpp"
#include "psdsos/rng.hpp"

namespace psdsos {

using json = nlohmann::json;

ScalarDataset ScalarDataset::subset(const std::vector<Eigen::Index>& rows) const {
  ScalarDataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(rows[i]);
    out.y[static_cast<Eigen::Index>(i)] = y[rows[i]];
  }
  return out;
}

void validate(const ScalarDataset& data) {
  if (data.n() == 0) throw InvalidArgument("scalar dataset is empty");
  if (data.input_dim() == 0) throw InvalidArgument("scalar dataset has zero input dimension");
  if (data.y.size() != data.n()) throw DimensionError("scalar dataset: inputs and outputs differ in length");
  if (!data.inputs.allFinite() || !data.y.allFinite()) throw InvalidArgument("scalar dataset is not finite");
}

std::string_view to_string(Representation r) {
  return r == Representation::approximate ? "approximate" : "exact";
}

Representation parse_representation(std::string_view name) {
  if (name == "approximate") return Representation::approximate;
  if (name == "exact") return Representation::exact;
  throw InvalidArgument("unknown representation '" + std::string(name) + "'");
}

namespace {

void require_gaussian(const KernelSpec& kernel) {
  if (!kernel.differentiable()) {
    throw InvalidArgument("convex regression needs kernel derivatives; the " +
                          std::string(to_string(kernel.family)) + " kernel is not twice differentiable");
  }
}

// Column j*p*p + b*p + a holds d^2 k(x_i, v_j) / dv_a dv_b, matching block_of.
Mat derivative_matrix(const KernelSpec& kernel, const Mat& X, const Mat& V) {
  const int p = static_cast<int>(X.cols());
  const Eigen::Index pp = p * p;
  Mat D(X.rows(), V.rows() * pp);
  for (Eigen::Index j = 0; j < V.rows(); ++j) {
    for (int b = 0; b < p; ++b) {
      for (int a = b; a < p; ++a) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
          const double v = eval_d2(kernel, X.row(i).transpose(), V.row(j).transpose(), a, b);
          D(i, j * pp + b * p + a) = v;
          D(i, j * pp + a * p + b) = v;
        }
      }
    }
  }
  return D;
}

// K4[(j,a,b), (k,c,e)] = d^4 k(v_j, v_k) / ds_a ds_b dt_c dt_e.
Mat fourth_derivative_matrix(const KernelSpec& kernel, const Mat& V) {
  const int p = static_cast<int>(V.cols());
  const Eigen::Index pp = p * p;
  const Eigen::Index m = V.rows() * pp;
  Mat K4(m, m);
  for (Eigen::Index j = 0; j < V.rows(); ++j)
    for (Eigen::Index k = 0; k < V.rows(); ++k)
      for (int b = 0; b < p; ++b)
        for (int a = 0; a < p; ++a)
          for (int e = 0; e < p; ++e)
            for (int c = 0; c < p; ++c)
              K4(j * pp + b * p + a, k * pp + e * p + c) =
                  eval_d4(kernel, V.row(j).transpose(), V.row(k).transpose(), a, b, c, e);
  return 0.5 * (K4 + K4.transpose());
}

double negative_energy(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  double out = 0.0;
  for (double l : es.eigenvalues()) out += l < 0.0 ? l * l : 0.0;
  return out;
}

double coupling_lipschitz(const Mat& Wg, double lambda2) {
  const Mat G = Wg.transpose() * Wg;
  return lambda_max(G.cwiseProduct(G)) / lambda2;
}

double max_block_norm(const Vec& blocks, int p) {
  double out = 0.0;
  for (Eigen::Index j = 0; j < blocks.size() / (p * p); ++j) out = std::max(out, block_of(blocks, j, p).norm());
  return out;
}

void check_params(const ConvexFitParams& params) {
  if (!(params.rho > 0.0)) throw InvalidArgument("rho must be positive");
  if (!(params.lambda2 > 0.0)) throw InvalidArgument("the smooth dual requires lambda2 > 0");
  if (!(params.lambda1 >= 0.0)) throw InvalidArgument("lambda1 must be non-negative");
}

Mat resolve_grid(const ScalarDataset& data, const Mat& grid) {
  if (grid.size() == 0) return data.inputs;
  if (grid.cols() != data.input_dim()) throw DimensionError("grid dimension does not match the inputs");
  return grid;
}

}  // namespace

Mat hessian_of_expansion(const KernelSpec& kernel, const Vec& alpha, const Mat& anchors,
                         const Eigen::Ref<const Vec>& v) {
  require_gaussian(kernel);
  if (alpha.size() != anchors.rows()) throw DimensionError("one coefficient per anchor expected");
  if (v.size() != anchors.cols()) throw DimensionError("hessian: point dimension mismatch");
  const int p = static_cast<int>(anchors.cols());
  Mat H = Mat::Zero(p, p);
  for (Eigen::Index i = 0; i < anchors.rows(); ++i) {
    if (alpha[i] == 0.0) continue;
    for (int b = 0; b < p; ++b)
      for (int a = b; a < p; ++a) H(a, b) += alpha[i] * eval_d2(kernel, anchors.row(i).transpose(), v, a, b);
  }
  H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
  return H;
}

GramFactorization nystrom_features(const KernelSpec& kernel, const Mat& grid, const NystromSpec& spec) {
  const auto ell = grid.rows();
  if (ell == 0) throw InvalidArgument("empty constraint grid");
  const int p = static_cast<int>(grid.cols());
  if (spec.rank == 0) return build_features(kernel, grid, p);
  if (spec.rank < 1 || spec.rank > ell) {
    throw InvalidArgument("Nystrom rank must lie in [1, " + std::to_string(ell) + "]");
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(ell));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (spec.rule == LandmarkRule::uniform_random) {
    Rng rng(spec.seed);
    for (std::size_t i = 0; i < static_cast<std::size_t>(spec.rank); ++i) {
      const auto j = i + rng.index(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
  }
  idx.resize(static_cast<std::size_t>(spec.rank));
  std::sort(idx.begin(), idx.end());
  Mat landmarks(spec.rank, p);
  for (std::size_t i = 0; i < idx.size(); ++i) landmarks.row(static_cast<Eigen::Index>(i)) = grid.row(idx[i]);
  return build_features(kernel, landmarks, p);
}

// Approximate representation.

ApproxConvexDual::ApproxConvexDual(const ScalarDataset& data, const Mat& grid, const KernelSpec& kernel,
                                   const ConvexFitParams& params, const NystromSpec& nystrom)
    : n_(data.n()), p_(static_cast<int>(data.input_dim())), params_(params) {
  validate(data);
  require_gaussian(kernel);
  check_params(params);
  const Mat V = resolve_grid(data, grid);
  ell_ = V.rows();

  train_ = build_features(kernel, data.inputs, 1);
  const Mat W = feature_matrix(train_, data.inputs);
  const auto Rt = train_.R.transpose().triangularView<Eigen::Lower>();
  E_ = Rt.solve(derivative_matrix(kernel, data.inputs, V));

  grid_ = nystrom_features(kernel, V, nystrom);
  Wg_ = feature_matrix(grid_, V);

  const double nn = static_cast<double>(n_);
  Mat M = W * W.transpose() / nn;
  M.diagonal().array() += params.rho;
  M_.compute(M);
  if (M_.info() != Eigen::Success) throw IndefiniteError("normal equations are not positive definite");
  wy_ = W * data.y / nn;
  y_norm2_ = data.y.squaredNorm();

  const Mat A = M_.matrixL().solve(E_);
  lipschitz_ = 0.5 * lambda_max(A * A.transpose()) + coupling_lipschitz(Wg_, params.lambda2);
}

Vec ApproxConvexDual::beta(const Vec& gamma) const {
  return M_.solve(wy_ + 0.5 * (E_ * gamma));
}

double ApproxConvexDual::value(const Vec& gamma, Vec* grad) const {
  if (gamma.size() != dim()) throw DimensionError("dual variable has the wrong size");
  const Vec z = wy_ + 0.5 * (E_ * gamma);
  const Vec b = M_.solve(z);
  const Mat S = assemble_blocks(Wg_, gamma, p_, params_.lambda1);
  if (grad == nullptr) return z.dot(b) + negative_energy(S) / (2.0 * params_.lambda2);
  const Mat N = negative_part_unchecked(S);
  *grad = E_.transpose() * b - contract_blocks(Wg_, N, p_) / params_.lambda2;
  return z.dot(b) + N.squaredNorm() / (2.0 * params_.lambda2);
}

Mat ApproxConvexDual::recover_B(const Vec& gamma) const {
  return negative_part_unchecked(assemble_blocks(Wg_, gamma, p_, params_.lambda1)) / params_.lambda2;
}

Vec ApproxConvexDual::alpha(const Vec& beta) const {
  return train_.R.triangularView<Eigen::Upper>().solve(beta);
}

// Exact representation.

ExactConvexDual::ExactConvexDual(const ScalarDataset& data, const Mat& grid, const KernelSpec& kernel,
                                 const ConvexFitParams& params)
    : n_(data.n()), p_(static_cast<int>(data.input_dim())), params_(params), y_(data.y) {
  validate(data);
  require_gaussian(kernel);
  check_params(params);
  const Mat V = resolve_grid(data, grid);
  ell_ = V.rows();
  K_ = gram(kernel, data.inputs);
  D_ = derivative_matrix(kernel, data.inputs, V);
  K4_ = fourth_derivative_matrix(kernel, V);
  Mat Q = K_ / static_cast<double>(n_);
  Q.diagonal().array() += params.rho;
  Q_.compute(Q);
  if (Q_.info() != Eigen::Success) throw IndefiniteError("K/n + rho I is not positive definite");
  grid_ = build_features(kernel, V, p_);
  Wg_ = feature_matrix(grid_, V);

  const Mat A = Q_.matrixL().solve(D_);
  const Mat H = (K4_ - A.transpose() * A / static_cast<double>(n_)) / (2.0 * params.rho);
  lipschitz_ = std::max(lambda_max(0.5 * (H + H.transpose())), 0.0) + coupling_lipschitz(Wg_, params.lambda2);
}

Vec ExactConvexDual::coefficients(const Vec& gamma) const {
  const Vec g = D_ * gamma;
  return Q_.solve(y_ - g / (2.0 * params_.rho)) / static_cast<double>(n_);
}

Vec ExactConvexDual::ridge_coefficients() const { return Q_.solve(y_) / static_cast<double>(n_); }

double ExactConvexDual::value(const Vec& gamma, Vec* grad) const {
  if (gamma.size() != dim()) throw DimensionError("dual variable has the wrong size");
  const double rho = params_.rho;
  const Vec g = D_ * gamma;
  const Vec c = Q_.solve(y_ - g / (2.0 * rho)) / static_cast<double>(n_);
  const Vec Kc = K_ * c;
  const Vec k4g = K4_ * gamma;
  const Vec fitted = Kc + g / (2.0 * rho);
  const double norm2 = c.dot(Kc) + c.dot(g) / rho + gamma.dot(k4g) / (4.0 * rho * rho);
  const Vec hess = D_.transpose() * c + k4g / (2.0 * rho);
  const double lagrangian = (y_ - fitted).squaredNorm() / static_cast<double>(n_) + rho * norm2 - gamma.dot(hess);
  const Mat S = assemble_blocks(Wg_, gamma, p_, params_.lambda1);
  if (grad == nullptr) return -lagrangian + negative_energy(S) / (2.0 * params_.lambda2);
  const Mat N = negative_part_unchecked(S);
  *grad = hess - contract_blocks(Wg_, N, p_) / params_.lambda2;
  return -lagrangian + N.squaredNorm() / (2.0 * params_.lambda2);
}

Mat ExactConvexDual::recover_B(const Vec& gamma) const {
  return negative_part_unchecked(assemble_blocks(Wg_, gamma, p_, params_.lambda1)) / params_.lambda2;
}

// Fitting.

namespace {

AgdOptions agd_options(const SolverOptions& opts) {
  AgdOptions agd;
  agd.tol = opts.tol;
  agd.max_iters = opts.max_iters;
  return agd;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::map<std::string, double> convex_hyperparameters(const KernelSpec& kernel, const ConvexFitParams& params) {
  return {{"rho", params.rho}, {"lambda1", params.lambda1}, {"lambda2", params.lambda2}, {"sigma", kernel.sigma}};
}

}  // namespace

ConvexFit fit_approx(const ScalarDataset& data, const Mat& grid, const KernelSpec& kernel,
                     const ConvexFitParams& params, const NystromSpec& nystrom, const SolverOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const ApproxConvexDual dual(data, grid, kernel, params, nystrom);
  auto objective = [&dual](const Vec& x, Vec* g) { return dual.value(x, g); };
  AgdResult res = minimize_backtracking(objective, Vec::Zero(dual.dim()), dual.lipschitz(), agd_options(opts));

  ConvexFit fit;
  ConvexModel& m = fit.model;
  m.representation = Representation::approximate;
  m.kernel = kernel;
  m.anchors = data.inputs;
  const Vec b = dual.beta(res.x);
  m.alpha = dual.alpha(b);
  m.grid = resolve_grid(data, grid);
  m.rho = params.rho;
  m.certificate.factor = dual.grid_factor();
  m.certificate.B = dual.recover_B(res.x);
  m.hyperparameters = convex_hyperparameters(kernel, params);
  if (nystrom.rank > 0) m.hyperparameters["nystrom_rank"] = nystrom.rank;

  SolveReport& rep = fit.report;
  const double nn = static_cast<double>(data.n());
  const Mat W = feature_matrix(dual.training_factor(), data.inputs);
  const RegularizerSpec reg(params.lambda1, params.lambda2);
  rep.primal_objective = (data.y - W.transpose() * b).squaredNorm() / nn + params.rho * b.squaredNorm() +
                         omega(reg, m.certificate.B);
  rep.dual_objective = dual.constant() - res.value;
  rep.gap = rep.primal_objective - rep.dual_objective;
  rep.iterations = res.iterations;
  rep.converged = res.converged;
  rep.max_constraint_residual = max_block_norm(res.grad, static_cast<int>(data.input_dim()));
  rep.trace = std::move(res.trace);
  rep.wall_time = seconds_since(start);
  return fit;
}

ConvexFit fit_exact(const ScalarDataset& data, const Mat& grid, const KernelSpec& kernel,
                    const ConvexFitParams& params, const SolverOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const ExactConvexDual dual(data, grid, kernel, params);
  auto objective = [&dual](const Vec& x, Vec* g) { return dual.value(x, g); };
  AgdResult res = minimize_backtracking(objective, Vec::Zero(dual.dim()), dual.lipschitz(), agd_options(opts));

  ConvexFit fit;
  ConvexModel& m = fit.model;
  m.representation = Representation::exact;
  m.kernel = kernel;
  m.anchors = data.inputs;
  m.alpha = dual.ridge_coefficients();
  m.delta = dual.coefficients(res.x) - m.alpha;
  m.grid = resolve_grid(data, grid);
  m.gamma = res.x;
  m.rho = params.rho;
  m.certificate.factor = dual.grid_factor();
  m.certificate.B = dual.recover_B(res.x);
  m.hyperparameters = convex_hyperparameters(kernel, params);

  SolveReport& rep = fit.report;
  rep.primal_objective = convex_primal_objective(m, data);
  rep.dual_objective = -res.value;
  rep.gap = rep.primal_objective - rep.dual_objective;
  rep.iterations = res.iterations;
  rep.converged = res.converged;
  rep.max_constraint_residual = max_block_norm(res.grad, static_cast<int>(data.input_dim()));
  rep.trace = std::move(res.trace);
  rep.wall_time = seconds_since(start);
  return fit;
}

// Evaluation.

double predict_point(const ConvexModel& model, const Eigen::Ref<const Vec>& x) {
  if (x.size() != model.input_dim()) throw DimensionError("predict: query dimension mismatch");
  double f = 0.0;
  const bool exact = model.representation == Representation::exact;
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i) {
    const double c = model.alpha[i] + (exact ? model.delta[i] : 0.0);
    if (c != 0.0) f += c * eval(model.kernel, x, model.anchors.row(i).transpose());
  }
  if (!exact) return f;
  const int p = static_cast<int>(model.input_dim());
  double extra = 0.0;
  for (Eigen::Index j = 0; j < model.grid.rows(); ++j) {
    const auto G = block_of(model.gamma, j, p);
    for (int b = 0; b < p; ++b)
      for (int a = 0; a < p; ++a)
        if (G(a, b) != 0.0) extra += G(a, b) * eval_d2(model.kernel, x, model.grid.row(j).transpose(), a, b);
  }
  return f + extra / (2.0 * model.rho);
}

Vec predict_scalar(const ConvexModel& model, const Mat& queries) {
  if (queries.cols() != model.input_dim()) throw DimensionError("predict: query dimension mismatch");
  Vec out(queries.rows());
  for (Eigen::Index i = 0; i < queries.rows(); ++i) out[i] = predict_point(model, queries.row(i).transpose());
  return out;
}

Mat hessian_at(const ConvexModel& model, const Eigen::Ref<const Vec>& x) {
  if (model.representation == Representation::approximate) {
    return hessian_of_expansion(model.kernel, model.alpha, model.anchors, x);
  }
  Mat H = hessian_of_expansion(model.kernel, model.alpha + model.delta, model.anchors, x);
  const int p = static_cast<int>(model.input_dim());
  Mat extra = Mat::Zero(p, p);
  for (Eigen::Index j = 0; j < model.grid.rows(); ++j) {
    const auto G = block_of(model.gamma, j, p);
    const Vec v = model.grid.row(j).transpose();
    for (int s = 0; s < p; ++s)
      for (int r = 0; r < p; ++r) {
        if (G(r, s) == 0.0) continue;
        for (int b = 0; b < p; ++b)
          for (int a = b; a < p; ++a) extra(a, b) += G(r, s) * eval_d4(model.kernel, x, v, a, b, r, s);
      }
  }
  extra.triangularView<Eigen::StrictlyUpper>() = extra.transpose();
  return H + extra / (2.0 * model.rho);
}

double convex_primal_objective(const ConvexModel& model, const ScalarDataset& data) {
  validate(data);
  const RegularizerSpec reg(model.hyperparameters.count("lambda1") ? model.hyperparameters.at("lambda1") : 0.0,
                            model.hyperparameters.count("lambda2") ? model.hyperparameters.at("lambda2") : 0.0);
  const double nn = static_cast<double>(data.n());
  const Vec fitted = predict_scalar(model, data.inputs);
  const Mat K = gram(model.kernel, model.anchors);
  double norm2 = 0.0;
  if (model.representation == Representation::approximate) {
    norm2 = model.alpha.dot(K * model.alpha);
  } else {
    const double rho = model.rho;
    const Vec c = model.alpha + model.delta;
    const Vec g = derivative_matrix(model.kernel, model.anchors, model.grid) * model.gamma;
    const Mat K4 = fourth_derivative_matrix(model.kernel, model.grid);
    norm2 = c.dot(K * c) + c.dot(g) / rho + model.gamma.dot(K4 * model.gamma) / (4.0 * rho * rho);
  }
  return (data.y - fitted).squaredNorm() / nn + model.rho * norm2 + omega(reg, model.certificate.B);
}

// Files.

using detail::matrix_from_json;
using detail::matrix_to_json;
using detail::vector_from_json;
using detail::vector_to_json;

std::string serialize(const ConvexModel& model) {
  json j;
  j["format"] = "psdsos-model";
  j["version"] = 1;
  j["kind"] = "convex";
  j["representation"] = std::string(to_string(model.representation));
  j["kernel"] = {{"family", std::string(to_string(model.kernel.family))}, {"sigma", model.kernel.sigma}};
  j["anchors"] = matrix_to_json(model.anchors);
  j["alpha"] = vector_to_json(model.alpha);
  j["delta"] = vector_to_json(model.delta);
  j["grid"] = matrix_to_json(model.grid);
  j["gamma"] = vector_to_json(model.gamma);
  j["rho"] = model.rho;
  j["certificate"] = {{"anchors", matrix_to_json(model.certificate.factor.anchors)},
                      {"B", matrix_to_json(model.certificate.B)},
                      {"jitter", model.certificate.factor.jitter}};
  j["hyperparameters"] = model.hyperparameters;
  return j.dump(1);
}

ConvexModel deserialize_convex(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "psdsos-model") throw ParseError("not a psdsos model file");
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported model file version");
    if (j.at("kind").get<std::string>() != "convex") throw ParseError("model file does not hold a convex model");
    ConvexModel m;
    m.representation = parse_representation(j.at("representation").get<std::string>());
    m.kernel = KernelSpec(parse_kernel_family(j.at("kernel").at("family").get<std::string>()),
                          j.at("kernel").at("sigma").get<double>());
    m.anchors = matrix_from_json(j.at("anchors"), "anchors");
    m.alpha = vector_from_json(j.at("alpha"), "alpha");
    m.delta = vector_from_json(j.at("delta"), "delta");
    m.grid = matrix_from_json(j.at("grid"), "grid");
    m.gamma = vector_from_json(j.at("gamma"), "gamma");
    m.rho = j.at("rho").get<double>();
    const auto& cert = j.at("certificate");
    const Mat landmarks = matrix_from_json(cert.at("anchors"), "certificate anchors");
    const int p = static_cast<int>(m.anchors.cols());
    m.certificate.factor = build_features(m.kernel, landmarks, p);
    if (cert.at("jitter").get<double>() != m.certificate.factor.jitter) {
      throw ParseError("stored jitter does not match the refactored Gram matrix");
    }
    m.certificate.B = matrix_from_json(cert.at("B"), "certificate B");
    m.hyperparameters = j.at("hyperparameters").get<std::map<std::string, double>>();
    const auto pp = static_cast<Eigen::Index>(p) * p;
    const bool exact = m.representation == Representation::exact;
    if (m.alpha.size() != m.anchors.rows() || m.grid.cols() != p || landmarks.cols() != p ||
        (exact && (m.delta.size() != m.anchors.rows() || m.gamma.size() != m.grid.rows() * pp))) {
      throw ParseError("convex model dimensions are inconsistent");
    }
    if (exact && !(m.rho > 0.0)) throw ParseError("exact representation needs rho > 0");
    validate(m.certificate);
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid model file: ") + e.what());
  } catch (const DimensionError& e) {
    throw ParseError(std::string("invalid model file: ") + e.what());
  }
}

void save_convex_model(const ConvexModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << serialize(model) << '\n';
}

ConvexModel load_convex_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_convex(ss.str());
}

}  // namespace psdsos
