#include "vrmc/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "vrmc/errors.hpp"
#include "vrmc/estimators.hpp"

namespace vrmc {

std::string_view to_string(Arm arm) { return arm == Arm::MuHat ? "mu_hat" : "pi"; }

void UcbState::record(Arm arm, double reward) {
    const auto b = static_cast<std::size_t>(arm);
    ++count[b];
    reward_sum[b] += reward;
    ++total;
}

double UcbState::average(Arm arm) const {
    const auto b = static_cast<std::size_t>(arm);
    return count[b] == 0 ? 0.0 : reward_sum[b] / static_cast<double>(count[b]);
}

Arm select_arm(const UcbState& state) {
    if (state.count[0] == 0) return Arm::MuHat;
    if (state.count[1] == 0) return Arm::Target;
    const double log_n = std::log(static_cast<double>(state.total));
    const auto score = [&](Arm arm) {
        const auto b = static_cast<std::size_t>(arm);
        return state.average(arm) + state.c * std::sqrt(log_n / static_cast<double>(state.count[b]));
    };
    return score(Arm::Target) > score(Arm::MuHat) ? Arm::Target : Arm::MuHat;
}

AdaptiveRunResult run_adaptive(const TabularMDP& mdp, const TimedPolicy& pi,
                               const TimedPolicy& mu_hat, std::size_t episodes, double c,
                               Rng& rng) {
    if (episodes == 0) throw ValidationError("adaptive run needs at least one episode");
    if (!(c >= 0.0)) throw ValidationError("UCB constant must be non-negative");
    check_shape(mdp, pi);
    check_shape(mdp, mu_hat);
    if (!covers(mu_hat, pi)) {
        throw InvalidTrajectoryError("mu_hat puts zero mass on an action pi can take");
    }

    AdaptiveRunResult result;
    result.state.c = c;
    result.log.reserve(episodes);
    EstimateAccumulator j;
    for (std::size_t k = 1; k <= episodes; ++k) {
        const Arm arm = select_arm(result.state);
        const TimedPolicy& behavior = arm == Arm::MuHat ? mu_hat : pi;
        const Trajectory traj = sample_trajectory(mdp, behavior, rng);
        const double g = pdis_return(traj, pi, behavior);
        const double reward = -g * g;
        result.state.record(arm, reward);
        j.update(g);
        result.log.push_back({k, arm, g, reward, j.mean()});
    }
    result.estimate = j.mean();
    return result;
}

std::vector<double> empirical_regret(std::span<const EpisodeRecord> log, double var_mu_hat,
                                     double var_pi) {
    const double best = std::min(var_mu_hat, var_pi);
    std::vector<double> curve;
    curve.reserve(log.size());
    double total = 0.0;
    for (const EpisodeRecord& e : log) {
        total += (e.arm == Arm::MuHat ? var_mu_hat : var_pi) - best;
        curve.push_back(total);
    }
    return curve;
}

} // namespace vrmc
