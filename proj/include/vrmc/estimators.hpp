#pragma once

#include <cstddef>

#include "vrmc/mdp.hpp"

namespace vrmc {

/// Per-decision importance sampling return, G <- rho_t (R_{t+1} + G) from t = T-1 down.
/// Throws InvalidTrajectoryError if mu gives zero probability to a visited pair.
double pdis_return(const Trajectory& traj, const TimedPolicy& pi, const TimedPolicy& mu);

/// Ordinary importance sampling return rho_{0:T-1} * sum_t R_{t+1}.
double ois_return(const Trajectory& traj, const TimedPolicy& pi, const TimedPolicy& mu);

/// Plain undiscounted return.
double plain_return(const Trajectory& traj);

/**
 * Streaming mean of returns.
 *
 * The mean is updated as J <- J + (G - J) / n. An empty accumulator reports
 * mean 0 and empty() == true. The spread is kept as the running sum of squared
 * deviations (Welford), which merges exactly across parallel runs.
 */
class EstimateAccumulator {
public:
    void update(double g);

    /// Combines two independent accumulators (Chan et al. pairwise update).
    void merge(const EstimateAccumulator& other);

    std::size_t count() const { return count_; }
    bool empty() const { return count_ == 0; }
    double mean() const { return mean_; }
    /// Sum of squared deviations from the mean.
    double sum_sq() const { return m2_; }
    /// Sample variance (n - 1 denominator); 0 for fewer than two samples.
    double variance() const;
    /// Mean of squared inputs.
    double second_moment() const;

private:
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

} // namespace vrmc
