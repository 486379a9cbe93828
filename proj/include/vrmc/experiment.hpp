#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vrmc/adaptive.hpp"
#include "vrmc/behavior_learn.hpp"
#include "vrmc/envs.hpp"
#include "vrmc/serialize.hpp"

// Grid-world experiment protocol: random environment, behavior-agnostic
// offline data, one learned behavior policy per random target policy, then
// online evaluation (on-policy, off-policy with mu_hat, adaptive) against exact
// ground truth from dynamic programming.

namespace vrmc::exp {

struct ExperimentConfig {
    std::size_t n = 5;
    double slip = 0.9;
    std::uint64_t seed = 0;
    std::size_t num_policies = 30;
    std::size_t runs_per_policy = 30;
    std::size_t online_steps = 500;
    std::size_t m = 100000;
    /// Random behavior policies mixed with the uniform policy to generate offline data.
    std::size_t num_behaviors = 4;
    FeatureKind feature_kind = FeatureKind::Tabular;
    /// One cell trains directly; several are tuned on the test split.
    std::vector<TrainConfig> grid{TrainConfig{}};
    double ucb_c = kDefaultUcbC;
    /// Grid sizes for the variance-ratio table; empty means {n}.
    std::vector<std::size_t> ratio_sizes;
    /// Worker threads; 0 uses the hardware concurrency. Never affects results.
    std::size_t threads = 0;
};

/// Throws ValidationError on zero counts, budget < n, bad slip or grid.
void validate(const ExperimentConfig& config);

io::Json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys throw ValidationError.
ExperimentConfig config_from_json(const io::Json& j);

/// FNV-1a 64 of the canonical JSON of every result-affecting field (not threads).
std::uint64_t config_hash(const ExperimentConfig& config);
std::string hex(std::uint64_t x);

/// Independent RNG seeds of each experiment stage, derived from the master seed.
struct StageSeeds {
    std::uint64_t env;
    std::uint64_t behaviors;
    std::uint64_t offline;
    std::uint64_t policies;
    std::uint64_t augment;
    std::uint64_t train;
    std::uint64_t online;
    std::uint64_t adaptive;
};

StageSeeds stage_seeds(std::uint64_t seed);

struct Environment {
    TabularMDP mdp;
    OfflineDataset data;
};

/// Grid world of side `n` and its offline dataset.
Environment make_environment(const ExperimentConfig& config, std::size_t n);

/// Uniform policy followed by num_behaviors random ones.
std::vector<TimedPolicy> behavior_policies(const ExperimentConfig& config, const Shape& shape);

/// The i-th random target policy.
TimedPolicy target_policy(const ExperimentConfig& config, const Shape& shape, std::size_t i);

struct PolicyStudy {
    TimedPolicy pi;
    LearnedBehavior learned;
    TrainConfig train_config; ///< config actually used (after tuning)
    double j_true = 0.0;
    double var_pi = 0.0;      ///< exact Var(G^PDIS) on-policy
    double var_mu_hat = 0.0;  ///< exact Var(G^PDIS) under the learned mu_hat
};

/// Learns mu_hat for target policy i and computes its exact variances.
PolicyStudy study_policy(const ExperimentConfig& config, const Environment& env, std::size_t i);

/// All num_policies studies, in index order.
std::vector<PolicyStudy> study_policies(const ExperimentConfig& config, const Environment& env);

struct CurveRow {
    std::size_t step;
    std::string method;
    double mean_norm_err;
    double std_err;
};

inline constexpr const char* kOnPolicy = "on-policy";
inline constexpr const char* kOffPolicy = "off-policy-mu-hat";
inline constexpr const char* kAdaptive = "adaptive";

/**
 * Runs runs_per_policy online evaluations per study and method. The estimate
 * after k episodes is reported at steps kT .. kT + T - 1, from T to the budget.
 * Errors |J_k - J| / J are averaged over all (policy, run) cells and divided by
 * the on-policy mean at the first episode (skipped if that mean is zero).
 */
std::vector<CurveRow> error_curve(const ExperimentConfig& config, const TabularMDP& mdp,
                                  const std::vector<PolicyStudy>& studies);

/// First step at which `method` reaches mean_norm_err <= threshold.
std::optional<std::size_t> steps_to_reach(const std::vector<CurveRow>& rows,
                                          const std::string& method, double threshold);

struct RatioRow {
    std::size_t n;
    double ratio; ///< mean over policies of Var(mu_hat) / Var(pi)
};

double mean_ratio(const std::vector<PolicyStudy>& studies);

/// One row per size in ratio_sizes (or n).
std::vector<RatioRow> variance_ratio(const ExperimentConfig& config);

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);
void write_ratio_csv(std::ostream& out, const std::vector<RatioRow>& rows);
/// `policy,j_true,var_pi,var_mu_hat,ratio,lr_r,lr_q,lr_q_hat`
void write_policy_csv(std::ostream& out, const std::vector<PolicyStudy>& studies);

/**
 * Full run into `dir`: env.json, offline.csv, target_policy.json, mu_hat.json,
 * model_r.json, model_q.json, model_q_hat.json, value_tables.json (policy 0),
 * policies.csv, error_curve.csv, variance_ratio.csv, adaptive_log.csv and
 * manifest.json. Errors are rethrown as StageError naming the stage.
 */
void run_pipeline(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Calls fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception by index is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

} // namespace vrmc::exp
