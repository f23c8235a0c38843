#include "cpgbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace cpgbo::gp {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;

double scaled_sq_dist(const double* a, const double* b, const double* ls, int begin, int end,
                      std::ptrdiff_t stride_a, std::ptrdiff_t stride_b) {
  double s = 0.0;
  for (int d = begin; d < end; ++d) {
    const double t = (a[d * stride_a] - b[d * stride_b]) / ls[d];
    s += t * t;
  }
  return s;
}

// Kernel between row i of A and row j of B, both column-major.
double kernel_rows(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                   Eigen::Index j, const KernelConfig& cfg) {
  const int dims = cfg.dims();
  const double* ls = cfg.lengthscales.data();
  const double* pa = a.data() + i;
  const double* pb = b.data() + j;
  const double rx = std::sqrt(scaled_sq_dist(pa, pb, ls, 0, cfg.param_dims, a.rows(), b.rows()));
  const double rc = std::sqrt(scaled_sq_dist(pa, pb, ls, cfg.param_dims, dims, a.rows(), b.rows()));
  return cfg.signal_variance * matern52(rx) * matern52(rc);
}

struct LogParams {
  // (log lengthscales..., log signal variance, log noise variance)
  static Eigen::VectorXd pack(const KernelConfig& cfg) {
    const int d = cfg.dims();
    Eigen::VectorXd t(d + 2);
    t.head(d) = cfg.lengthscales.array().log();
    t[d] = std::log(cfg.signal_variance);
    t[d + 1] = std::log(cfg.noise_variance);
    return t;
  }
  static KernelConfig unpack(const Eigen::VectorXd& t, int param_dims) {
    const int d = static_cast<int>(t.size()) - 2;
    KernelConfig cfg;
    cfg.lengthscales = t.head(d).array().exp();
    cfg.signal_variance = std::exp(t[d]);
    cfg.noise_variance = std::exp(t[d + 1]);
    cfg.param_dims = param_dims;
    return cfg;
  }
};

struct Bounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

Bounds log_bounds(int dims, const FitOptions& o) {
  Bounds b;
  b.lo.resize(dims + 2);
  b.hi.resize(dims + 2);
  b.lo.head(dims).setConstant(std::log(o.min_lengthscale));
  b.hi.head(dims).setConstant(std::log(o.max_lengthscale));
  b.lo[dims] = std::log(o.min_signal_variance);
  b.hi[dims] = std::log(o.max_signal_variance);
  b.lo[dims + 1] = std::log(kNoiseFloor);
  b.hi[dims + 1] = std::log(o.max_noise_variance);
  return b;
}

struct AdamResult {
  Eigen::VectorXd theta;
  double lml = -std::numeric_limits<double>::infinity();
};

AdamResult adam_ascent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::VectorXd theta,
                       int param_dims, const Bounds& bounds, const FitOptions& o) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  theta = theta.cwiseMax(bounds.lo).cwiseMin(bounds.hi);
  AdamResult best;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd grad;
  for (int it = 0; it <= o.iterations; ++it) {
    double lml;
    try {
      lml = log_marginal_likelihood(x, y, LogParams::unpack(theta, param_dims), &grad);
    } catch (const FitError&) {
      break;
    }
    if (!std::isfinite(lml) || !grad.allFinite()) break;
    if (lml > best.lml) {
      best.lml = lml;
      best.theta = theta;
    }
    if (it == o.iterations) break;
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kBeta1, it + 1);
    const double c2 = 1.0 - std::pow(kBeta2, it + 1);
    const Eigen::VectorXd step =
        ((m / c1).array() / ((v / c2).array().sqrt() + kEps)).matrix() * o.learning_rate;
    theta = (theta + step).cwiseMax(bounds.lo).cwiseMin(bounds.hi);
  }
  return best;
}

}  // namespace

KernelConfig KernelConfig::defaults(int dims, int param_dims) {
  KernelConfig cfg;
  cfg.lengthscales = Eigen::VectorXd::Constant(dims, 0.5);
  cfg.signal_variance = 1.0;
  cfg.noise_variance = 1e-2;
  cfg.param_dims = param_dims;
  return cfg;
}

void KernelConfig::validate() const {
  if (lengthscales.size() == 0) throw std::invalid_argument("KernelConfig: no dimensions");
  if (!(lengthscales.array() > 0.0).all()) {
    throw std::invalid_argument("KernelConfig: lengthscales must be positive");
  }
  if (param_dims < 0 || param_dims > dims()) {
    throw std::invalid_argument("KernelConfig: param_dims out of range");
  }
  if (!(signal_variance > 0.0)) throw std::invalid_argument("KernelConfig: signal variance <= 0");
  if (!(noise_variance >= kNoiseFloor)) {
    throw std::invalid_argument("KernelConfig: noise variance below jitter floor");
  }
}

double matern52(double r) {
  const double s = kSqrt5 * r;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b, const KernelConfig& cfg) {
  double rx2 = 0.0, rc2 = 0.0;
  for (int d = 0; d < cfg.dims(); ++d) {
    const double t = (a[d] - b[d]) / cfg.lengthscales[d];
    (d < cfg.param_dims ? rx2 : rc2) += t * t;
  }
  return cfg.signal_variance * matern52(std::sqrt(rx2)) * matern52(std::sqrt(rc2));
}

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& inputs, const KernelConfig& cfg) {
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = cfg.signal_variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = kernel_rows(inputs, i, inputs, j, cfg);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelConfig& cfg) {
  Eigen::MatrixXd k(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = kernel_rows(a, i, b, j, cfg);
  }
  return k;
}

namespace reference {

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& inputs, const KernelConfig& cfg) {
  return reference::cross_covariance(inputs, inputs, cfg);
}

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelConfig& cfg) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = kernel_eval(a.row(i).transpose(), b.row(j).transpose(), cfg);
    }
  }
  return k;
}

}  // namespace reference

double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const KernelConfig& cfg, Eigen::VectorXd* gradient) {
  const Eigen::Index n = x.rows();
  const int dims = cfg.dims();
  const int p = cfg.param_dims;
  const double s2 = cfg.signal_variance;
  const double* ls = cfg.lengthscales.data();

  // Per-pair sub-kernel values, kept for the gradient.
  Eigen::MatrixXd kx = Eigen::MatrixXd::Ones(n, n);
  Eigen::MatrixXd kc = Eigen::MatrixXd::Ones(n, n);
  Eigen::MatrixXd rx = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd rc = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double* pi = x.data() + i;
      const double* pj = x.data() + j;
      const double a = std::sqrt(scaled_sq_dist(pi, pj, ls, 0, p, n, n));
      const double b = std::sqrt(scaled_sq_dist(pi, pj, ls, p, dims, n, n));
      rx(i, j) = rx(j, i) = a;
      rc(i, j) = rc(j, i) = b;
      kx(i, j) = kx(j, i) = matern52(a);
      kc(i, j) = kc(j, i) = matern52(b);
    }
  }
  Eigen::MatrixXd k = s2 * kx.cwiseProduct(kc);
  k.diagonal().array() += cfg.noise_variance;

  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw FitError("covariance not positive definite");
  const Eigen::VectorXd alpha = llt.solve(y);
  const Eigen::MatrixXd& l = llt.matrixLLT();
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(l(i, i));
  const double lml = -0.5 * y.dot(alpha) - log_det_half -
                     0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  if (gradient != nullptr) {
    const Eigen::MatrixXd w =
        alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::VectorXd& g = *gradient;
    g = Eigen::VectorXd::Zero(dims + 2);
    g[dims + 1] = 0.5 * cfg.noise_variance * w.trace();
    double g_s2 = 0.5 * s2 * w.diagonal().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double wij = 2.0 * w(i, j);  // both triangles
        const double kprod = s2 * kx(i, j) * kc(i, j);
        g_s2 += 0.5 * wij * kprod;
        // d m52(r) / d log l_d = 5/3 (1 + sqrt5 r) exp(-sqrt5 r) (delta_d / l_d)^2
        const double fx = 0.5 * wij * s2 * kc(i, j) * (5.0 / 3.0) *
                          (1.0 + kSqrt5 * rx(i, j)) * std::exp(-kSqrt5 * rx(i, j));
        const double fc = 0.5 * wij * s2 * kx(i, j) * (5.0 / 3.0) *
                          (1.0 + kSqrt5 * rc(i, j)) * std::exp(-kSqrt5 * rc(i, j));
        for (int d = 0; d < dims; ++d) {
          const double t = (x(i, d) - x(j, d)) / ls[d];
          g[d] += (d < p ? fx : fc) * t * t;
        }
      }
    }
    g[dims] = g_s2;
  }
  return lml;
}

GpModel GpModel::fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                     const KernelConfig& initial, const FitOptions& options) {
  const Eigen::Index n = inputs.rows();
  if (n < 1) throw FitError("GpModel::fit: need at least one observation");
  if (targets.size() != n) throw FitError("GpModel::fit: inputs/targets size mismatch");
  if (!targets.allFinite() || !inputs.allFinite()) throw FitError("GpModel::fit: non-finite data");
  if (inputs.cols() != initial.dims()) throw FitError("GpModel::fit: dimension mismatch");
  initial.validate();

  GpModel model;
  model.inputs_ = inputs;
  model.y_mean_ = targets.mean();
  double var = 0.0;
  if (n > 1) var = (targets.array() - model.y_mean_).square().sum() / static_cast<double>(n - 1);
  model.y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
  const Eigen::VectorXd y = (targets.array() - model.y_mean_) / model.y_scale_;

  KernelConfig cfg = initial;
  if (options.optimize_hyperparameters) {
    const int dims = initial.dims();
    const Bounds bounds = log_bounds(dims, options);
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(LogParams::pack(initial));
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < options.restarts; ++r) {
      Eigen::VectorXd t(dims + 2);
      for (int d = 0; d < dims; ++d) t[d] = std::log(0.1) + u(rng) * (std::log(2.0) - std::log(0.1));
      t[dims] = std::log(0.3) + u(rng) * (std::log(3.0) - std::log(0.3));
      t[dims + 1] = std::log(1e-4) + u(rng) * (std::log(1e-1) - std::log(1e-4));
      starts.push_back(t);
    }

    std::vector<AdamResult> results(starts.size());
#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < starts.size(); ++s) {
      results[s] = adam_ascent(inputs, y, starts[s], initial.param_dims, bounds, options);
    }
    // The initial point is evaluated unclamped so that the returned optimum
    // is never worse than the caller's hyperparameters.
    double best = -std::numeric_limits<double>::infinity();
    try {
      best = gp::log_marginal_likelihood(inputs, y, initial);
    } catch (const FitError&) {
    }
    for (const auto& r : results) {
      if (r.lml > best) {
        best = r.lml;
        cfg = LogParams::unpack(r.theta, initial.param_dims);
      }
    }
  }

  Eigen::MatrixXd k = covariance_matrix(inputs, cfg);
  k.diagonal().array() += cfg.noise_variance;
  double jitter = 0.0;
  model.chol_.compute(k);
  for (double extra : {1e-6, 1e-5, 1e-4}) {
    if (model.chol_.info() == Eigen::Success) break;
    k.diagonal().array() += extra - jitter;
    jitter = extra;
    model.chol_.compute(k);
  }
  if (model.chol_.info() != Eigen::Success) {
    throw FitError("GpModel::fit: covariance not positive definite after max jitter");
  }
  model.jitter_ = jitter;
  model.cfg_ = cfg;
  model.alpha_ = model.chol_.solve(y);
  const Eigen::MatrixXd& l = model.chol_.matrixLLT();
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(l(i, i));
  model.lml_ = -0.5 * y.dot(model.alpha_) - log_det_half -
               0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  return model;
}

Posterior GpModel::posterior(const Eigen::Ref<const Eigen::VectorXd>& query) const {
  const Eigen::Index n = inputs_.rows();
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks[i] = kernel_eval(inputs_.row(i).transpose(), query, cfg_);
  const double mean = ks.dot(alpha_);
  chol_.matrixL().solveInPlace(ks);
  const double var = std::max(0.0, cfg_.signal_variance - ks.squaredNorm());
  return {y_mean_ + y_scale_ * mean, y_scale_ * std::sqrt(var)};
}

void GpModel::posterior_batch(const Eigen::MatrixXd& queries, Eigen::VectorXd& mean,
                              Eigen::VectorXd& std) const {
  constexpr Eigen::Index kBlock = 64;
  const Eigen::Index m = queries.rows();
  const Eigen::Index n = inputs_.rows();
  mean.resize(m);
  std.resize(m);
  const Eigen::Index blocks = (m + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index begin = b * kBlock;
    const Eigen::Index len = std::min(kBlock, m - begin);
    Eigen::MatrixXd kt(n, len);  // K(X, Q_block)
    for (Eigen::Index q = 0; q < len; ++q) {
      for (Eigen::Index i = 0; i < n; ++i) kt(i, q) = kernel_rows(inputs_, i, queries, begin + q, cfg_);
    }
    mean.segment(begin, len) = (kt.transpose() * alpha_).array() * y_scale_ + y_mean_;
    chol_.matrixL().solveInPlace(kt);
    const Eigen::VectorXd var =
        (cfg_.signal_variance - kt.colwise().squaredNorm().array()).cwiseMax(0.0).matrix().transpose();
    std.segment(begin, len) = var.array().sqrt() * y_scale_;
  }
}

namespace reference {

void posterior_batch(const GpModel& model, const Eigen::MatrixXd& queries, Eigen::VectorXd& mean,
                     Eigen::VectorXd& std) {
  mean.resize(queries.rows());
  std.resize(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const Posterior p = model.posterior(queries.row(q).transpose());
    mean[q] = p.mean;
    std[q] = p.std;
  }
}

}  // namespace reference

}  // namespace cpgbo::gp
