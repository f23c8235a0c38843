// Times the OpenMP kernels against their serial reference versions and checks
// that both produce the same numbers.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "cpgbo/cbo.hpp"

using namespace cpgbo;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

Eigen::MatrixXd random_inputs(std::mt19937_64& rng, int n, int dims) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, dims);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dims; ++d) x(i, d) = u(rng);
  return x;
}

void row(const char* name, double parallel, double serial, double max_diff) {
  std::printf("%-22s %10.3f ms %10.3f ms %8.2fx   max |diff| %.1e\n", name, 1e3 * parallel, 1e3 * serial,
              serial / parallel, max_diff);
}

}  // namespace

int main() {
  std::mt19937_64 rng(1);
  const gp::KernelConfig cfg = gp::KernelConfig::defaults(10, 8);
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-22s %13s %13s %9s\n", "kernel", "parallel", "reference", "speedup");

  const Eigen::MatrixXd x = random_inputs(rng, 200, 10);
  Eigen::MatrixXd kp, ks;
  const double tp = best_of(5, [&] { kp = gp::covariance_matrix(x, cfg); });
  const double ts = best_of(5, [&] { ks = gp::reference::covariance_matrix(x, cfg); });
  row("covariance 200x200", tp, ts, (kp - ks).cwiseAbs().maxCoeff());

  const Eigen::MatrixXd q = random_inputs(rng, 4096, 10);
  const double cp = best_of(5, [&] { kp = gp::cross_covariance(q, x, cfg); });
  const double cs = best_of(5, [&] { ks = gp::reference::cross_covariance(q, x, cfg); });
  row("cross cov 4096x200", cp, cs, (kp - ks).cwiseAbs().maxCoeff());

  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y[i] = std::sin(5.0 * x(i, 0)) + x(i, 9);
  gp::FitOptions fo;
  fo.optimize_hyperparameters = false;
  const gp::GpModel model = gp::GpModel::fit(x, y, cfg, fo);
  Eigen::VectorXd m1, s1, m2, s2;
  const double pp = best_of(5, [&] { model.posterior_batch(q, m1, s1); });
  const double ps = best_of(5, [&] { gp::reference::posterior_batch(model, q, m2, s2); });
  row("posterior 4096 @ n=200", pp, ps, std::max((m1 - m2).cwiseAbs().maxCoeff(), (s1 - s2).cwiseAbs().maxCoeff()));

  const Eigen::Vector2d context(0.4, 0.6);
  const SearchSpace space = SearchSpace::all_active(8);
  AcquisitionResult a, b;
  const double up = best_of(3, [&] {
    Rng r(7);
    a = maximize_ucb(model, context, 2.0, space, AcquisitionOptions{}, r);
  });
  const double us = best_of(3, [&] {
    Rng r(7);
    b = reference::maximize_ucb(model, context, 2.0, space, AcquisitionOptions{}, r);
  });
  row("UCB search (1024+8x128)", up, us, (a.x - b.x).cwiseAbs().maxCoeff());
  return 0;
}
