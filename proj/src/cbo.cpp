#include "cpgbo/cbo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cpgbo {

void BetaSchedule::validate() const {
  if (!(beta_init >= 0.0) || !(beta_init_c >= 0.0)) {
    throw std::invalid_argument("BetaSchedule: beta must be >= 0");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("BetaSchedule: gamma in (0,1)");
  if (n_decay < 0 || n_decay_c < 0) throw std::invalid_argument("BetaSchedule: n_decay >= 0");
}

double update_beta(const BetaSchedule& s, int n, bool context_changed) {
  const double base = context_changed ? s.beta_init_c : s.beta_init;
  const int start = context_changed ? s.n_decay_c : s.n_decay;
  return base * std::pow(s.gamma, std::max(n - start, 0));
}

void ContextSharingConfig::validate() const {
  if (!(t_load > 0.0 && t_slope > 0.0 && r_load > 0.0 && r_slope > 0.0)) {
    throw std::invalid_argument("ContextSharingConfig: thresholds and ranges must be positive");
  }
}

bool same_context(const ContextVector& other, const ContextVector& current,
                  const ContextSharingConfig& cfg) {
  const double bl = cfg.load_band();
  const double bs = cfg.slope_band();
  return current.load - bl <= other.load && other.load <= current.load + bl &&
         current.slope - bs <= other.slope && other.slope <= current.slope + bs;
}

int count_same_context(std::span<const ContextVector> history, const ContextVector& current,
                       const ContextSharingConfig& cfg) {
  return static_cast<int>(std::count_if(history.begin(), history.end(), [&](const ContextVector& c) {
    return same_context(c, current, cfg);
  }));
}

std::vector<ContextVector> OptimizerHistory::contexts() const {
  std::vector<ContextVector> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.context);
  return out;
}

int count_same_context(const OptimizerHistory& history, const ContextVector& current,
                       const ContextSharingConfig& cfg) {
  const auto c = history.contexts();
  return count_same_context(std::span<const ContextVector>(c), current, cfg);
}

OptimizerHistory reuse_history(OptimizerHistory history, double new_v_star,
                               const ObjectiveConfig& cfg) {
  for (auto& t : history.trials) {
    t.v_star = new_v_star;
    t.objective = objective_value(t, new_v_star, cfg);
  }
  history.v_star = new_v_star;
  return history;
}

SearchSpace SearchSpace::all_active(int dims) {
  SearchSpace s;
  s.active.assign(dims, true);
  s.fixed = Eigen::VectorXd::Zero(dims);
  return s;
}

Eigen::VectorXd random_point(const SearchSpace& space, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x = space.fixed;
  for (int d = 0; d < space.dims(); ++d) {
    if (space.active[d]) x[d] = u(rng);
  }
  return x;
}

double ucb_value(const gp::GpModel& model, const Eigen::VectorXd& x_unit,
                 const Eigen::VectorXd& context_unit, double beta) {
  Eigen::VectorXd q(x_unit.size() + context_unit.size());
  q << x_unit, context_unit;
  const gp::Posterior p = model.posterior(q);
  return p.mean + beta * p.std;
}

namespace {

struct Scored {
  double ucb;
  Eigen::Index index;
};

// Coordinate search over the active dimensions; only strict improvements are
// accepted, so the result never scores below the start.
std::pair<Eigen::VectorXd, double> refine(const gp::GpModel& model, Eigen::VectorXd x, double ucb,
                                          const Eigen::VectorXd& context, double beta,
                                          const SearchSpace& space,
                                          const AcquisitionOptions& options) {
  std::vector<int> dims;
  for (int d = 0; d < space.dims(); ++d) {
    if (space.active[d]) dims.push_back(d);
  }
  if (dims.empty()) return {x, ucb};

  double step = options.initial_step;
  bool improved_in_sweep = false;
  for (int t = 0; t < options.refine_steps; ++t) {
    const int d = dims[t % dims.size()];
    for (double dir : {1.0, -1.0}) {
      Eigen::VectorXd trial = x;
      trial[d] = std::clamp(x[d] + dir * step, 0.0, 1.0);
      if (trial[d] == x[d]) continue;
      const double v = ucb_value(model, trial, context, beta);
      if (v > ucb) {
        x = trial;
        ucb = v;
        improved_in_sweep = true;
        break;
      }
    }
    if ((t + 1) % static_cast<int>(dims.size()) == 0) {
      if (!improved_in_sweep) step *= 0.5;
      improved_in_sweep = false;
    }
  }
  return {x, ucb};
}

AcquisitionResult finish(const gp::GpModel& model, const Eigen::MatrixXd& candidates,
                         const Eigen::VectorXd& scores, const Eigen::VectorXd& context,
                         double beta, const SearchSpace& space, const AcquisitionOptions& options,
                         bool parallel) {
  const int dims = space.dims();
  std::vector<Scored> order(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) order[i] = {scores[i], i};
  std::stable_sort(order.begin(), order.end(),
                   [](const Scored& a, const Scored& b) { return a.ucb > b.ucb; });

  const int starts = std::min<int>(options.refine_starts, static_cast<int>(order.size()));
  std::vector<std::pair<Eigen::VectorXd, double>> refined(starts);
#pragma omp parallel for schedule(static) if (parallel)
  for (int s = 0; s < starts; ++s) {
    const Eigen::VectorXd x0 = candidates.row(order[s].index).head(dims).transpose();
    refined[s] = refine(model, x0, order[s].ucb, context, beta, space, options);
  }

  AcquisitionResult result;
  result.best_raw_ucb = order.front().ucb;
  result.x = candidates.row(order.front().index).head(dims).transpose();
  result.ucb = order.front().ucb;
  for (const auto& [x, v] : refined) {
    if (v > result.ucb) {
      result.ucb = v;
      result.x = x;
    }
  }
  return result;
}

Eigen::MatrixXd draw_candidates(const Eigen::VectorXd& context, const SearchSpace& space,
                                const AcquisitionOptions& options, Rng& rng) {
  if (options.candidates < 1) throw std::invalid_argument("maximize_ucb: need >= 1 candidate");
  const int dims = space.dims();
  Eigen::MatrixXd c(options.candidates, dims + context.size());
  for (int i = 0; i < options.candidates; ++i) {
    c.row(i).head(dims) = random_point(space, rng).transpose();
    c.row(i).tail(context.size()) = context.transpose();
  }
  return c;
}

}  // namespace

AcquisitionResult maximize_ucb(const gp::GpModel& model, const Eigen::VectorXd& context_unit,
                               double beta, const SearchSpace& space,
                               const AcquisitionOptions& options, Rng& rng) {
  const Eigen::MatrixXd candidates = draw_candidates(context_unit, space, options, rng);
  Eigen::VectorXd mean, std;
  model.posterior_batch(candidates, mean, std);
  const Eigen::VectorXd scores = mean + beta * std;
  return finish(model, candidates, scores, context_unit, beta, space, options, true);
}

namespace reference {

AcquisitionResult maximize_ucb(const gp::GpModel& model, const Eigen::VectorXd& context_unit,
                               double beta, const SearchSpace& space,
                               const AcquisitionOptions& options, Rng& rng) {
  const Eigen::MatrixXd candidates = draw_candidates(context_unit, space, options, rng);
  Eigen::VectorXd scores(candidates.rows());
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    const gp::Posterior p = model.posterior(candidates.row(i).transpose());
    scores[i] = p.mean + beta * p.std;
  }
  return finish(model, candidates, scores, context_unit, beta, space, options, false);
}

}  // namespace reference

void training_data(const OptimizerHistory& history, const NormalizationRanges& ranges,
                   const SearchSpace& space, Eigen::MatrixXd& inputs, Eigen::VectorXd& targets) {
  const auto n = static_cast<Eigen::Index>(history.trials.size());
  inputs.resize(n, kInputDims);
  targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TrialRecord& t = history.trials[i];
    const auto x = normalize(t.params, ranges);
    const auto c = normalize(t.context, ranges);
    for (std::size_t d = 0; d < x.size(); ++d) {
      inputs(i, static_cast<Eigen::Index>(d)) = space.active[d] ? x[d] : space.fixed[d];
    }
    inputs(i, 8) = c[0];
    inputs(i, 9) = c[1];
    targets[i] = t.objective;
  }
}

CpgParams propose_next(const OptimizerHistory& history, const ContextVector& context, double beta,
                       const NormalizationRanges& ranges, Rng& rng,
                       const ProposalOptions& options, const CpgParams& base,
                       ProposalInfo* info) {
  ProposalInfo local;
  ProposalInfo& out = info != nullptr ? *info : local;
  out = ProposalInfo{};
  const SearchSpace& space = options.space;
  if (space.dims() != static_cast<int>(CpgParams::kNumOptimized)) {
    throw std::invalid_argument("propose_next: search space must have 8 dimensions");
  }

  auto random_params = [&] {
    out.random = true;
    const Eigen::VectorXd x = random_point(space, rng);
    return denormalize(std::span<const double, CpgParams::kNumOptimized>(x.data(), 8), ranges, base);
  };

  if (static_cast<int>(history.trials.size()) < options.random_trials || history.trials.empty()) {
    return random_params();
  }

  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
  training_data(history, ranges, space, inputs, targets);

  gp::FitOptions fit = options.fit;
  fit.seed = rng();
  const gp::KernelConfig initial = options.initial_kernel.value_or(
      gp::KernelConfig::defaults(static_cast<int>(kInputDims), CpgParams::kNumOptimized));

  std::optional<gp::GpModel> model;
  try {
    model = gp::GpModel::fit(inputs, targets, initial, fit);
  } catch (const gp::FitError&) {
    out.fit_failed = true;
    return random_params();
  }
  out.kernel = model->kernel();

  const auto c = normalize(context, ranges);
  const Eigen::Vector2d context_unit(c[0], c[1]);
  const AcquisitionResult best = maximize_ucb(*model, context_unit, beta, space,
                                              options.acquisition, rng);
  Eigen::VectorXd q(kInputDims);
  q << best.x, context_unit;
  const gp::Posterior p = model->posterior(q);
  out.ucb = best.ucb;
  out.predicted_mean = p.mean;
  out.predicted_std = p.std;
  return denormalize(std::span<const double, CpgParams::kNumOptimized>(best.x.data(), 8), ranges,
                     base);
}

double BetaController::next_beta(std::span<const ContextVector> contexts) {
  if (contexts.empty()) {
    last_count_ = 0;
    return update_beta(schedule_, 0, changed_);
  }
  const ContextVector& latest = contexts.back();
  const std::size_t n = contexts.size();
  if (n >= 2) {
    const std::size_t begin = n - 1 > static_cast<std::size_t>(window_) ? n - 1 - window_ : 0;
    const auto previous = contexts.subspan(begin, n - 1 - begin);
    if (count_same_context(previous, latest, sharing_) == 0) changed_ = true;
  }
  last_count_ = count_same_context(contexts, latest, sharing_);
  return update_beta(schedule_, last_count_, changed_);
}

}  // namespace cpgbo
