#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace cpgbo::gp {

/// Product kernel k((x, c), (x', c')) = s2 * m52(x, x') * m52(c, c'), each
/// factor a unit-variance Matern 5/2 with its own per-dimension lengthscales.
/// The first `param_dims` input coordinates belong to x, the rest to c.
struct KernelConfig {
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;
  double noise_variance = 1e-2;
  int param_dims = 0;

  static KernelConfig defaults(int dims, int param_dims);
  int dims() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;
};

inline constexpr double kNoiseFloor = 1e-6;

/// Unit Matern 5/2 at scaled distance r.
double matern52(double r);

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b, const KernelConfig& cfg);

/// K(X, X) without noise. Rows of `inputs` are points. OpenMP over rows.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& inputs, const KernelConfig& cfg);

/// K(A, B) without noise. OpenMP over rows of A.
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelConfig& cfg);

namespace reference {
// Straight double loops over kernel_eval; kept to check the parallel kernels.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& inputs, const KernelConfig& cfg);
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelConfig& cfg);
}  // namespace reference

struct FitOptions {
  bool optimize_hyperparameters = true;
  int restarts = 5;          // random starts in addition to the initial config
  int iterations = 60;       // Adam steps per start
  double learning_rate = 0.1;
  double min_lengthscale = 0.05;
  double max_lengthscale = 20.0;
  double min_signal_variance = 1e-2;
  double max_signal_variance = 1e2;
  double max_noise_variance = 1.0;
  std::uint64_t seed = 0;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Posterior {
  double mean = 0.0;
  double std = 0.0;
};

/// Log marginal likelihood of standardized targets under cfg, plus its
/// gradient with respect to (log lengthscales, log signal variance, log noise
/// variance) when `gradient` is non-null. Throws FitError if K is not
/// positive definite.
double log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                               const KernelConfig& cfg, Eigen::VectorXd* gradient = nullptr);

/// Immutable GP posterior. Safe to query from many threads.
class GpModel {
 public:
  /// Standardizes the targets, optionally fits hyperparameters by maximizing
  /// the log marginal likelihood from `initial` plus random restarts, and
  /// factorizes the covariance with jitter escalation 1e-6 .. 1e-4.
  static GpModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                     const KernelConfig& initial, const FitOptions& options = {});

  Posterior posterior(const Eigen::Ref<const Eigen::VectorXd>& query) const;

  /// Posterior at every row of `queries`; blocked and OpenMP-parallel.
  void posterior_batch(const Eigen::MatrixXd& queries, Eigen::VectorXd& mean,
                       Eigen::VectorXd& std) const;

  const KernelConfig& kernel() const { return cfg_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  int size() const { return static_cast<int>(inputs_.rows()); }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }
  double jitter() const { return jitter_; }
  /// LML of the standardized targets at the final hyperparameters.
  double log_marginal_likelihood() const { return lml_; }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  KernelConfig cfg_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

namespace reference {
void posterior_batch(const GpModel& model, const Eigen::MatrixXd& queries, Eigen::VectorXd& mean,
                     Eigen::VectorXd& std);
}  // namespace reference

}  // namespace cpgbo::gp
