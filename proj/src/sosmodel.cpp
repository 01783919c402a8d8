#include "psdsos/sosmodel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_matrix.hpp"
#include "psdsos/errors.hpp"
#include "psdsos/psdlinalg.hpp"

namespace psdsos {

using json = nlohmann::json;
using detail::matrix_from_json;
using detail::matrix_to_json;

GramFactorization build_features(const KernelSpec& kernel, const Mat& anchors, int d) {
  if (anchors.rows() == 0) throw InvalidArgument("build_features: no anchors");
  if (d < 1) throw InvalidArgument("build_features: output size d must be >= 1");
  GramFactorization f;
  f.kernel = kernel;
  f.anchors = anchors;
  f.d = d;
  f.K = gram(kernel, anchors);
  auto chol = chol_upper_jitter(f.K);
  f.R = std::move(chol.R);
  f.jitter = chol.jitter;
  return f;
}

Mat FeatureBlock::dense() const {
  Mat out = Mat::Zero(w.size() * d, d);
  for (Eigen::Index a = 0; a < w.size(); ++a) out.block(a * d, 0, d, d).diagonal().setConstant(w[a]);
  return out;
}

FeatureBlock features_at(const GramFactorization& f, const Eigen::Ref<const Vec>& x) {
  if (x.size() != f.input_dim()) throw DimensionError("features_at: query dimension does not match anchors");
  Vec v(f.n());
  for (Eigen::Index i = 0; i < f.n(); ++i) v[i] = eval(f.kernel, x, f.anchors.row(i).transpose());
  FeatureBlock out;
  out.w = f.R.transpose().triangularView<Eigen::Lower>().solve(v);
  out.d = f.d;
  return out;
}

Mat feature_matrix(const GramFactorization& f, const Mat& points) {
  if (points.cols() != f.input_dim()) throw DimensionError("feature_matrix: point dimension does not match anchors");
  const Mat V = cross_gram(f.kernel, f.anchors, points);
  return f.R.transpose().triangularView<Eigen::Lower>().solve(V);
}

void validate(const SosModel& model) {
  const Eigen::Index nd = model.factor.n() * model.factor.d;
  if (model.B.rows() != nd || model.B.cols() != nd) {
    throw DimensionError("B has shape " + std::to_string(model.B.rows()) + "x" + std::to_string(model.B.cols()) +
                         ", expected " + std::to_string(nd) + "x" + std::to_string(nd));
  }
  const SymEig eig = sym_eig(model.B);
  const double top = std::max(0.0, eig.eigenvalues[0]);
  if (eig.eigenvalues[nd - 1] < -1e-8 * top) throw InvalidArgument("B is not positive semi-definite");
}

Mat contract_one(const Vec& w, const Mat& B, int d) {
  const Eigen::Index n = w.size();
  Mat F = Mat::Zero(d, d);
  for (Eigen::Index a = 0; a < n; ++a) {
    if (w[a] == 0.0) continue;
    for (Eigen::Index b = 0; b < n; ++b) F.noalias() += (w[a] * w[b]) * B.block(a * d, b * d, d, d);
  }
  return 0.5 * (F + F.transpose());
}

Mat evaluate(const SosModel& model, const Eigen::Ref<const Vec>& x) {
  const FeatureBlock psi = features_at(model.factor, x);
  if (model.B.rows() != psi.w.size() * model.factor.d) throw DimensionError("evaluate: B does not match features");
  return contract_one(psi.w, model.B, model.factor.d);
}

namespace {

Mat kron_identity(const Mat& R, int d) {
  Mat out = Mat::Zero(R.rows() * d, R.cols() * d);
  for (Eigen::Index a = 0; a < R.rows(); ++a)
    for (Eigen::Index b = 0; b < R.cols(); ++b) out.block(a * d, b * d, d, d).diagonal().setConstant(R(a, b));
  return out;
}

}  // namespace

Mat coefficient_matrix(const SosModel& model) {
  const int d = model.factor.d;
  const Mat Rt = kron_identity(model.factor.R, d);
  Mat C = Rt.triangularView<Eigen::Upper>().solve(model.B);
  C = Rt.triangularView<Eigen::Upper>().solve(C.transpose().eval());
  return 0.5 * (C + C.transpose());
}

RegularizerSpec::RegularizerSpec(double l1, double l2) : lambda1(l1), lambda2(l2) {
  if (!(l1 >= 0.0) || !(l2 >= 0.0)) throw InvalidArgument("regularization weights must be non-negative");
  if (l1 + l2 <= 0.0) throw InvalidArgument("at least one regularization weight must be positive");
}

double omega(const RegularizerSpec& reg, const Mat& B) {
  return reg.lambda1 * B.trace() + 0.5 * reg.lambda2 * B.squaredNorm();
}

Mat assemble_blocks(const Mat& W, const Vec& gamma, int d, double shift) {
  const Eigen::Index r = W.rows();
  const Eigen::Index m = W.cols();
  Mat S(r * d, r * d);
  Vec coeff(m);
  Mat Spq(r, r);
  for (int p = 0; p < d; ++p) {
    for (int q = p; q < d; ++q) {
      for (Eigen::Index i = 0; i < m; ++i) coeff[i] = gamma[i * d * d + q * d + p];
      Spq.noalias() = W * coeff.asDiagonal() * W.transpose();
      for (Eigen::Index a = 0; a < r; ++a) {
        for (Eigen::Index b = a; b < r; ++b) {
          const double v = 0.5 * (Spq(a, b) + Spq(b, a));
          S(a * d + p, b * d + q) = v;
          S(b * d + q, a * d + p) = v;
          S(b * d + p, a * d + q) = v;
          S(a * d + q, b * d + p) = v;
        }
      }
    }
  }
  S.diagonal().array() += shift;
  return S;
}

Vec contract_blocks(const Mat& W, const Mat& N, int d) {
  const Eigen::Index r = W.rows();
  const Eigen::Index m = W.cols();
  Vec out(m * d * d);
  Mat Npq(r, r);
  Mat NW(r, m);
  for (int p = 0; p < d; ++p) {
    for (int q = p; q < d; ++q) {
      for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = 0; b < r; ++b) Npq(a, b) = N(a * d + p, b * d + q);
      NW.noalias() = Npq * W;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double v = W.col(i).dot(NW.col(i));
        out[i * d * d + q * d + p] = v;
        out[i * d * d + p * d + q] = v;
      }
    }
  }
  return out;
}

namespace {

constexpr int kModelVersion = 1;

}  // namespace

std::string serialize(const SosModel& model) {
  json j;
  j["format"] = "psdsos-model";
  j["version"] = kModelVersion;
  j["kind"] = "psd";
  j["kernel"] = {{"family", std::string(to_string(model.factor.kernel.family))},
                 {"sigma", model.factor.kernel.sigma}};
  j["anchors"] = matrix_to_json(model.factor.anchors);
  j["d"] = model.factor.d;
  j["B"] = matrix_to_json(model.B);
  j["jitter"] = model.factor.jitter;
  j["hyperparameters"] = model.hyperparameters;
  return j.dump(1);
}

SosModel deserialize(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "psdsos-model") throw ParseError("not a psdsos model file");
    const int version = j.at("version").get<int>();
    if (version != kModelVersion) throw ParseError("unsupported model file version " + std::to_string(version));
    if (j.at("kind").get<std::string>() != "psd") throw ParseError("model file does not hold a PSD model");
    const KernelSpec kernel(parse_kernel_family(j.at("kernel").at("family").get<std::string>()),
                            j.at("kernel").at("sigma").get<double>());
    const Mat anchors = matrix_from_json(j.at("anchors"), "anchors");
    const int d = j.at("d").get<int>();
    SosModel model;
    model.factor = build_features(kernel, anchors, d);
    model.B = matrix_from_json(j.at("B"), "B");
    const double stored_jitter = j.at("jitter").get<double>();
    if (stored_jitter != model.factor.jitter) throw ParseError("stored jitter does not match the refactored Gram matrix");
    model.hyperparameters = j.at("hyperparameters").get<std::map<std::string, double>>();
    if (model.B.rows() != anchors.rows() * d || model.B.cols() != anchors.rows() * d) {
      throw ParseError("B dimensions do not match anchors and d");
    }
    validate(model);
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid model file: ") + e.what());
  }
}

void save_model(const SosModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << serialize(model) << '\n';
}

SosModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace psdsos
