#include "psdsos/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "psdsos/errors.hpp"
#include "psdsos/psdlinalg.hpp"

namespace psdsos {

double fill_distance(const Mat& samples, const Mat& probes) {
  if (samples.rows() == 0 || probes.rows() == 0) throw InvalidArgument("fill_distance: empty point set");
  if (samples.cols() != probes.cols()) throw DimensionError("fill_distance: dimension mismatch");
  double h2 = 0.0;
  for (Eigen::Index i = 0; i < probes.rows(); ++i) {
    const double nearest = (samples.rowwise() - probes.row(i)).rowwise().squaredNorm().minCoeff();
    h2 = std::max(h2, nearest);
  }
  return std::sqrt(h2);
}

Mat box_probes(const Vec& lo, const Vec& hi, int per_axis) {
  if (lo.size() != hi.size() || lo.size() == 0) throw DimensionError("box_probes: bad bounds");
  if (per_axis < 2) throw InvalidArgument("box_probes: need at least 2 points per axis");
  const auto p = lo.size();
  Eigen::Index total = 1;
  for (Eigen::Index k = 0; k < p; ++k) total *= per_axis;
  Mat out(total, p);
  for (Eigen::Index r = 0; r < total; ++r) {
    Eigen::Index rest = r;
    for (Eigen::Index k = 0; k < p; ++k) {
      const auto i = rest % per_axis;
      rest /= per_axis;
      out(r, k) = lo[k] + (hi[k] - lo[k]) * static_cast<double>(i) / (per_axis - 1);
    }
  }
  return out;
}

double c0_constant(int m, int p) {
  if (m < 1 || p < 1) throw InvalidArgument("c0_constant: need m >= 1 and p >= 1");
  const double spread = std::max(1.0, 18.0 * (m - 1) * (m - 1));
  return 3.0 * std::pow(p, m) / std::tgamma(m + 1.0) * std::pow(spread, m);
}

SmoothnessConstants sobolev_constants(double s, int p, int m) {
  const double half = 0.5 * p;
  if (!(s > half + m)) throw InvalidArgument("Sobolev constants need s > p/2 + m");
  SmoothnessConstants c;
  c.m = m;
  c.source = ConstantSource::sobolev;
  const double scale = std::pow(2.0 * std::numbers::pi, half);
  c.M = scale * std::pow(2.0, s + 0.5);
  c.D_m = scale * std::sqrt(std::tgamma(m + half) * std::tgamma(s - half - m) / (std::tgamma(s - half) * std::tgamma(half)));
  return c;
}

double gaussian_derivative_bound(int m, double sigma) {
  if (m < 0 || !(sigma > 0.0)) throw InvalidArgument("gaussian_derivative_bound: bad arguments");
  const double peak = std::tgamma(2.0 * m + 1.0) / std::tgamma(m + 1.0);
  return std::max(1.0, std::sqrt(peak) / std::pow(sigma, m));
}

EigenBound eigen_bound(double seminorm_sum, double trace_B, const SmoothnessConstants& c, int p, double h,
                       double radius) {
  if (seminorm_sum < 0.0 || trace_B < 0.0 || h < 0.0 || !(radius > 0.0) || c.M < 0.0 || c.D_m < 0.0) {
    throw InvalidArgument("eigen_bound: inputs must be non-negative");
  }
  EigenBound out;
  out.C0 = c0_constant(c.m, p);
  out.C = out.C0 * (seminorm_sum + c.M * c.D_m * trace_B);
  out.epsilon = out.C * std::pow(h, c.m);
  const double spread = 18.0 * (c.m - 1) * (c.m - 1);
  out.valid = h <= radius * std::min(1.0, spread > 0.0 ? 1.0 / spread : 1.0);
  return out;
}

namespace {

// All multi-indices of total order m in p dimensions.
void multi_indices(int p, int m, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == p - 1) {
    cur.push_back(m);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int a = m; a >= 0; --a) {
    cur.push_back(a);
    multi_indices(p, m - a, cur, out);
    cur.pop_back();
  }
}

double binomial(int n, int k) { return std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)); }

}  // namespace

double seminorm_estimate(const MatrixFunction& F, int m, const Mat& probes, double step) {
  if (m < 1) throw InvalidArgument("seminorm_estimate: m must be >= 1");
  if (probes.rows() == 0) throw InvalidArgument("seminorm_estimate: no probes");
  if (!(step > 0.0)) throw InvalidArgument("seminorm_estimate: step must be positive");
  const int p = static_cast<int>(probes.cols());
  std::vector<std::vector<int>> alphas;
  std::vector<int> cur;
  multi_indices(p, m, cur, alphas);

  const Mat F0 = F(probes.row(0).transpose());
  const auto d = F0.rows();
  Vec best = Vec::Zero(d);
  for (Eigen::Index r = 0; r < probes.rows(); ++r) {
    const Vec x = probes.row(r).transpose();
    for (const auto& alpha : alphas) {
      // tensor product of 1-D central stencils, offsets (a/2 - i) h
      Vec acc = Vec::Zero(d);
      std::vector<int> idx(static_cast<std::size_t>(p), 0);
      while (true) {
        Vec point = x;
        double weight = 1.0;
        for (int k = 0; k < p; ++k) {
          const int a = alpha[static_cast<std::size_t>(k)];
          const int i = idx[static_cast<std::size_t>(k)];
          point[k] += (0.5 * a - i) * step;
          weight *= ((i % 2) ? -1.0 : 1.0) * binomial(a, i);
        }
        acc += weight * F(point).diagonal();
        int k = 0;
        for (; k < p; ++k) {
          auto& i = idx[static_cast<std::size_t>(k)];
          if (++i <= alpha[static_cast<std::size_t>(k)]) break;
          i = 0;
        }
        if (k == p) break;
      }
      best = best.cwiseMax(acc.cwiseAbs() / std::pow(step, m));
    }
  }
  return best.sum();
}

double empirical_min_eig(const MatrixFunction& F, const Mat& probes) {
  if (probes.rows() == 0) throw InvalidArgument("empirical_min_eig: no probes");
  double out = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < probes.rows(); ++r) {
    const Mat v = F(probes.row(r).transpose());
    out = std::min(out, lambda_min(0.5 * (v + v.transpose())));
  }
  return out;
}

CertificateReport convexity_deficit(const ConvexModel& model, const SmoothnessConstants& c, const Mat& probes,
                                    double radius, double fd_step, bool lambda_max_form) {
  if (model.certificate.B.size() == 0) throw InvalidArgument("convexity_deficit: model has no certificate matrix");
  const int p = static_cast<int>(model.input_dim());
  if (probes.cols() != p) throw DimensionError("convexity_deficit: probe dimension mismatch");
  CertificateReport rep;
  rep.h = fill_distance(model.grid, probes);
  rep.probe_count = probes.rows();
  rep.m = c.m;
  rep.seminorm_estimate = seminorm_estimate([&model](const Vec& x) { return hessian_at(model, x); }, c.m, probes,
                                            fd_step);
  rep.lambda_max_form = lambda_max_form;
  rep.trace_B = std::max(0.0, lambda_max_form ? lambda_max(model.certificate.B) : model.certificate.B.trace());
  const EigenBound b = eigen_bound(rep.seminorm_estimate, rep.trace_B, c, p, rep.h, radius);
  rep.C0 = b.C0;
  rep.C = b.C;
  rep.epsilon = b.epsilon;
  rep.eta = b.epsilon;
  rep.valid = b.valid;
  return rep;
}

std::string to_json(const CertificateReport& r) {
  nlohmann::json j;
  j["fill_distance"] = r.h;
  j["probe_count"] = r.probe_count;
  j["m"] = r.m;
  j["C0"] = r.C0;
  j["seminorm_estimate"] = r.seminorm_estimate;
  j["seminorm_is_estimate"] = true;
  j["trace_B"] = r.trace_B;
  j["lambda_max_form"] = r.lambda_max_form;
  j["C"] = r.C;
  j["epsilon"] = r.epsilon;
  j["eta"] = r.eta;
  j["valid"] = r.valid;
  return j.dump(1);
}

}  // namespace psdsos
