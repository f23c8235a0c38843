#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cpgbo/gp.hpp"
#include "cpgbo/objective.hpp"

namespace cpgbo {

using Rng = std::mt19937_64;

/// Exploration factor decay: beta = beta_init * gamma^max(n - n_decay, 0),
/// switching to (beta_init_c, n_decay_c) once a context change was seen.
struct BetaSchedule {
  double beta_init = 5.0;
  double beta_init_c = 1.5;
  double gamma = 0.7;
  int n_decay = 10;
  int n_decay_c = 3;

  void validate() const;
};

double update_beta(const BetaSchedule& schedule, int n, bool context_changed);

inline constexpr double kInferenceBeta = 1e-6;

struct ContextSharingConfig {
  double t_load = 0.2;
  double t_slope = 0.1;
  double r_load = 40.0;
  double r_slope = 0.5;

  double load_band() const { return t_load * r_load; }
  double slope_band() const { return t_slope * r_slope; }
  void validate() const;
};

/// True if `other` lies within the load and slope bands around `current`.
bool same_context(const ContextVector& other, const ContextVector& current,
                  const ContextSharingConfig& cfg);

int count_same_context(std::span<const ContextVector> history, const ContextVector& current,
                       const ContextSharingConfig& cfg);

struct OptimizerHistory {
  std::vector<TrialRecord> trials;
  double v_star = 0.5;
  std::uint64_t seed = 0;

  std::vector<ContextVector> contexts() const;
};

int count_same_context(const OptimizerHistory& history, const ContextVector& current,
                       const ContextSharingConfig& cfg);

/// Recomputes every stored objective for a new target velocity. Parameters,
/// contexts and traces are untouched; aborted trials keep the floor value.
OptimizerHistory reuse_history(OptimizerHistory history, double new_v_star,
                               const ObjectiveConfig& cfg = {});

struct AcquisitionOptions {
  int candidates = 1024;
  int refine_starts = 8;
  int refine_steps = 128;
  double initial_step = 0.1;
};

struct AcquisitionResult {
  Eigen::VectorXd x;            // unit-cube parameters (without context)
  double ucb = 0.0;
  double best_raw_ucb = 0.0;    // best of the random candidates before refinement
};

/// Box description of the parameter part of the GP input: dimensions with
/// active[d] == false are pinned to fixed[d].
struct SearchSpace {
  std::vector<bool> active;
  Eigen::VectorXd fixed;

  static SearchSpace all_active(int dims);
  int dims() const { return static_cast<int>(active.size()); }
};

/// argmax over x of mu(x; c) + beta * sigma(x; c): uniform candidates scored
/// in parallel, then coordinate refinement from the best few.
AcquisitionResult maximize_ucb(const gp::GpModel& model, const Eigen::VectorXd& context_unit,
                               double beta, const SearchSpace& space,
                               const AcquisitionOptions& options, Rng& rng);

namespace reference {
// Same search with every candidate scored one at a time.
AcquisitionResult maximize_ucb(const gp::GpModel& model, const Eigen::VectorXd& context_unit,
                               double beta, const SearchSpace& space,
                               const AcquisitionOptions& options, Rng& rng);
}  // namespace reference

double ucb_value(const gp::GpModel& model, const Eigen::VectorXd& x_unit,
                 const Eigen::VectorXd& context_unit, double beta);

Eigen::VectorXd random_point(const SearchSpace& space, Rng& rng);

struct ProposalOptions {
  int random_trials = 3;  // trials 0..random_trials-1 are uniform samples
  AcquisitionOptions acquisition;
  gp::FitOptions fit;
  SearchSpace space = SearchSpace::all_active(CpgParams::kNumOptimized);
  std::optional<gp::KernelConfig> initial_kernel;  // warm start for the fit
};

struct ProposalInfo {
  bool random = false;
  bool fit_failed = false;
  double ucb = 0.0;
  double predicted_mean = 0.0;
  double predicted_std = 0.0;
  std::optional<gp::KernelConfig> kernel;
};

/// GP training set built from the history: rows are
/// [normalized params (8), normalized context (2)], targets the objectives.
void training_data(const OptimizerHistory& history, const NormalizationRanges& ranges,
                   const SearchSpace& space, Eigen::MatrixXd& inputs, Eigen::VectorXd& targets);

/// Next parameters to try. Uniform random over the box for the first
/// random_trials trials, afterwards the UCB maximizer at the given context.
/// Falls back to a random sample if the GP fit fails.
CpgParams propose_next(const OptimizerHistory& history, const ContextVector& context, double beta,
                       const NormalizationRanges& ranges, Rng& rng,
                       const ProposalOptions& options = {}, const CpgParams& base = {},
                       ProposalInfo* info = nullptr);

/// Tracks the context-change flag and trial counts across a session.
class BetaController {
 public:
  BetaController(BetaSchedule schedule, ContextSharingConfig sharing, int change_window = 5)
      : schedule_(schedule), sharing_(sharing), window_(change_window) {}

  /// Beta for the next proposal given all completed trials' contexts.
  double next_beta(std::span<const ContextVector> contexts);

  bool context_changed() const { return changed_; }
  int last_count() const { return last_count_; }

 private:
  BetaSchedule schedule_;
  ContextSharingConfig sharing_;
  int window_;
  bool changed_ = false;
  int last_count_ = 0;
};

}  // namespace cpgbo
