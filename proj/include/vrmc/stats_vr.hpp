#pragma once

#include <span>
#include <vector>

// Importance sampling for an expectation E_{A~pi}[q(A)] over a finite set:
// the variance-minimizing sampling distribution and closed-form moments of the
// estimator rho(A) q(A), rho = pi / mu.

namespace vrmc::stats {

/// Target distribution pi and payoff q over a finite action set.
class DiscreteProblem {
public:
    /// Validates pi (sums to 1 within 1e-12) and q (finite); entries below
    /// 1e-300 in magnitude are snapped to zero.
    DiscreteProblem(std::vector<double> pi, std::vector<double> q);

    std::span<const double> pi() const { return pi_; }
    std::span<const double> q() const { return q_; }
    std::size_t size() const { return pi_.size(); }

    /// sum_a pi(a) q(a)
    double target_mean() const;

private:
    std::vector<double> pi_;
    std::vector<double> q_;
};

enum class SupportCheck {
    Enforce,  ///< require mu(a) = 0  =>  pi(a) q(a) = 0; throws SupportError otherwise
    Unchecked ///< sum only over mu(a) > 0 without validating membership
};

/// mu*(a) proportional to pi(a)|q(a)|; uniform when every pi(a) q(a) is zero.
std::vector<double> optimal_sampler(const DiscreteProblem& problem);

/// sum_{a: mu(a) > 0} pi(a) q(a), the mean of rho(A) q(A) under A ~ mu.
double weighted_mean(const DiscreteProblem& problem, std::span<const double> mu,
                     SupportCheck check = SupportCheck::Enforce);

/// sum_{a: mu(a) > 0} pi(a)^2 q(a)^2 / mu(a) - weighted_mean^2.
double weighted_variance(const DiscreteProblem& problem, std::span<const double> mu,
                         SupportCheck check = SupportCheck::Enforce);

} // namespace vrmc::stats
