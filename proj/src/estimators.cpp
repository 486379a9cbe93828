#include "vrmc/estimators.hpp"

#include <string>

#include "vrmc/errors.hpp"

namespace vrmc {
namespace {

double ratio(const Step& step, std::size_t t, const TimedPolicy& pi, const TimedPolicy& mu) {
    const double m = mu.prob(t, step.state, step.action);
    if (m == 0.0) {
        throw InvalidTrajectoryError("behavior probability is zero at visited step t=" +
                                     std::to_string(t));
    }
    return pi.prob(t, step.state, step.action) / m;
}

void check_lengths(const Trajectory& traj, const TimedPolicy& pi, const TimedPolicy& mu) {
    if (!(pi.shape() == mu.shape())) throw DimensionError("policy shapes differ");
    if (traj.steps.size() != pi.shape().horizon) {
        throw DimensionError("trajectory length differs from horizon");
    }
}

} // namespace

double pdis_return(const Trajectory& traj, const TimedPolicy& pi, const TimedPolicy& mu) {
    check_lengths(traj, pi, mu);
    double g = 0.0;
    for (std::size_t t = traj.steps.size(); t-- > 0;) {
        const Step& step = traj.steps[t];
        g = ratio(step, t, pi, mu) * (step.reward + g);
    }
    return g;
}

double ois_return(const Trajectory& traj, const TimedPolicy& pi, const TimedPolicy& mu) {
    check_lengths(traj, pi, mu);
    double rho = 1.0;
    double g = 0.0;
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        rho *= ratio(traj.steps[t], t, pi, mu);
        g += traj.steps[t].reward;
    }
    return rho * g;
}

double plain_return(const Trajectory& traj) {
    double g = 0.0;
    for (const Step& step : traj.steps) g += step.reward;
    return g;
}

void EstimateAccumulator::update(double g) {
    ++count_;
    const double delta = g - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (g - mean_);
}

void EstimateAccumulator::merge(const EstimateAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double n_a = static_cast<double>(count_);
    const double n_b = static_cast<double>(other.count_);
    const double n = n_a + n_b;
    const double delta = other.mean_ - mean_;
    mean_ += delta * n_b / n;
    m2_ += other.m2_ + delta * delta * n_a * n_b / n;
    count_ += other.count_;
}

double EstimateAccumulator::variance() const {
    return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
}

double EstimateAccumulator::second_moment() const {
    return count_ == 0 ? 0.0 : m2_ / static_cast<double>(count_) + mean_ * mean_;
}

} // namespace vrmc
