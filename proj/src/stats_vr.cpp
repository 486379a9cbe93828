#include "vrmc/stats_vr.hpp"

#include <cmath>

#include "vrmc/errors.hpp"

namespace vrmc::stats {
namespace {

constexpr double kSnapToZero = 1e-300;

void check_mu(const DiscreteProblem& problem, std::span<const double> mu, SupportCheck check) {
    if (mu.size() != problem.size()) throw DimensionError("mu has wrong length");
    double sum = 0.0;
    for (double m : mu) {
        if (!std::isfinite(m) || m < 0.0) throw ValidationError("mu is not a distribution");
        sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("mu does not sum to 1");
    if (check == SupportCheck::Unchecked) return;
    for (std::size_t a = 0; a < mu.size(); ++a) {
        if (mu[a] == 0.0 && problem.pi()[a] * problem.q()[a] != 0.0) {
            throw SupportError(0, 0, a, "sampling distribution outside the unbiased family");
        }
    }
}

} // namespace

DiscreteProblem::DiscreteProblem(std::vector<double> pi, std::vector<double> q)
    : pi_(std::move(pi)), q_(std::move(q)) {
    if (pi_.empty() || pi_.size() != q_.size()) {
        throw DimensionError("pi and q must be non-empty and of equal length");
    }
    double sum = 0.0;
    for (double& p : pi_) {
        if (!std::isfinite(p) || p < 0.0) throw ValidationError("pi is not a distribution");
        if (p < kSnapToZero) p = 0.0;
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("pi does not sum to 1");
    for (double& v : q_) {
        if (!std::isfinite(v)) throw ValidationError("q is not finite");
        if (std::abs(v) < kSnapToZero) v = 0.0;
    }
}

double DiscreteProblem::target_mean() const {
    double sum = 0.0;
    for (std::size_t a = 0; a < pi_.size(); ++a) sum += pi_[a] * q_[a];
    return sum;
}

std::vector<double> optimal_sampler(const DiscreteProblem& problem) {
    const std::size_t n = problem.size();
    std::vector<double> mu(n);
    double norm = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        mu[a] = problem.pi()[a] * std::abs(problem.q()[a]);
        norm += mu[a];
    }
    if (norm == 0.0) {
        mu.assign(n, 1.0 / static_cast<double>(n));
        return mu;
    }
    for (double& m : mu) m /= norm;
    return mu;
}

double weighted_mean(const DiscreteProblem& problem, std::span<const double> mu,
                     SupportCheck check) {
    check_mu(problem, mu, check);
    double sum = 0.0;
    for (std::size_t a = 0; a < mu.size(); ++a) {
        if (mu[a] > 0.0) sum += problem.pi()[a] * problem.q()[a];
    }
    return sum;
}

double weighted_variance(const DiscreteProblem& problem, std::span<const double> mu,
                         SupportCheck check) {
    const double mean = weighted_mean(problem, mu, check);
    double second = 0.0;
    for (std::size_t a = 0; a < mu.size(); ++a) {
        if (mu[a] > 0.0) {
            const double pq = problem.pi()[a] * problem.q()[a];
            second += pq * pq / mu[a];
        }
    }
    return second - mean * mean;
}

} // namespace vrmc::stats
