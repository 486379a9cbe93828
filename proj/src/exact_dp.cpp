#include "vrmc/exact_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vrmc/errors.hpp"
#include "vrmc/kernels.hpp"

namespace vrmc::dp {
namespace {

// Normalizers below this trigger the uniform fallback of mu* and mu_hat.
constexpr double kFallbackThreshold = 1e-300;

/// out[(s, a)] = sum_s' p(s'|s,a) x[s'].
void expect_next(const TabularMDP& mdp, std::span<const double> x, std::span<double> out) {
    kernels::matvec(mdp.transitions(), mdp.num_states() * mdp.num_actions(), x, out);
}

/// out[s] = sum_a pi_t(a|s) table_t(s, a).
void policy_average(const TimedPolicy& pi, const StateActionTable& table, std::size_t t,
                    std::span<double> out) {
    const std::size_t num_actions = pi.shape().num_actions;
    for (std::size_t s = 0; s < out.size(); ++s) {
        const auto p = pi.row(t, s);
        const auto x = table.row(t, s);
        double sum = 0.0;
        for (std::size_t a = 0; a < num_actions; ++a) sum += p[a] * x[a];
        out[s] = sum;
    }
}

/// Action values of pi under a time-dependent reward table.
StateActionTable evaluate_action_values(const TabularMDP& mdp, const TimedPolicy& pi,
                                        const StateActionTable& reward) {
    const Shape shape = mdp.shape();
    StateActionTable q(shape);
    std::vector<double> state_value(shape.num_states);
    std::vector<double> next(shape.num_states * shape.num_actions);
    for (std::size_t t = shape.horizon; t-- > 0;) {
        const auto r = reward.at_time(t);
        auto qt = q.at_time(t);
        if (t + 1 == shape.horizon) {
            std::copy(r.begin(), r.end(), qt.begin());
        } else {
            policy_average(pi, q, t + 1, state_value);
            expect_next(mdp, state_value, next);
            for (std::size_t i = 0; i < qt.size(); ++i) qt[i] = r[i] + next[i];
        }
    }
    return q;
}

/// Normalized pi_t(.|s) * sqrt(max(x, 0)) with the uniform fallback.
void sqrt_weighted_row(std::span<const double> pi_row, std::span<const double> x,
                       std::span<double> out) {
    double norm = 0.0;
    for (std::size_t a = 0; a < out.size(); ++a) {
        out[a] = pi_row[a] * std::sqrt(std::max(x[a], 0.0));
        norm += out[a];
    }
    if (norm < kFallbackThreshold) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
        return;
    }
    for (double& m : out) m /= norm;
}

} // namespace

QV compute_q_v(const TabularMDP& mdp, const TimedPolicy& pi) {
    check_shape(mdp, pi);
    const Shape shape = mdp.shape();
    QV out{StateActionTable(shape), StateTable(shape.horizon, shape.num_states)};
    std::vector<double> next(shape.num_states * shape.num_actions);
    const auto r = mdp.rewards();
    for (std::size_t t = shape.horizon; t-- > 0;) {
        auto qt = out.q.at_time(t);
        if (t + 1 == shape.horizon) {
            std::copy(r.begin(), r.end(), qt.begin());
        } else {
            expect_next(mdp, out.v.at_time(t + 1), next);
            for (std::size_t i = 0; i < qt.size(); ++i) qt[i] = r[i] + next[i];
        }
        policy_average(pi, out.q, t, out.v.at_time(t));
    }
    return out;
}

StateActionTable compute_nu(const TabularMDP& mdp, const StateTable& v) {
    const Shape shape = mdp.shape();
    if (v.horizon() != shape.horizon || v.num_states() != shape.num_states) {
        throw DimensionError("value table does not match MDP");
    }
    StateActionTable nu(shape);
    std::vector<double> mean(shape.num_states * shape.num_actions);
    const auto& k = kernels::active();
    for (std::size_t t = 0; t + 1 < shape.horizon; ++t) {
        const auto next_v = v.at_time(t + 1);
        expect_next(mdp, next_v, mean);
        auto nut = nu.at_time(t);
        for (std::size_t s = 0; s < shape.num_states; ++s) {
            for (std::size_t a = 0; a < shape.num_actions; ++a) {
                const std::size_t i = s * shape.num_actions + a;
                nut[i] = k.centered_square(mdp.transition_row(s, a).data(), next_v.data(), mean[i],
                                           shape.num_states);
            }
        }
    }
    return nu;
}

TildeTables compute_tilde(const TabularMDP& mdp, const TimedPolicy& pi, const StateActionTable& q,
                          const StateTable& v, const StateActionTable& nu) {
    check_shape(mdp, pi);
    const Shape shape = mdp.shape();
    StateActionTable r_tilde(shape);
    for (std::size_t t = 0; t < shape.horizon; ++t) {
        for (std::size_t s = 0; s < shape.num_states; ++s) {
            const double v2 = v(t, s) * v(t, s);
            for (std::size_t a = 0; a < shape.num_actions; ++a) {
                r_tilde(t, s, a) = nu(t, s, a) + q(t, s, a) * q(t, s, a) - v2;
            }
        }
    }
    auto q_tilde = evaluate_action_values(mdp, pi, r_tilde);
    return {std::move(r_tilde), std::move(q_tilde)};
}

HatTables compute_hat(const TabularMDP& mdp, const TimedPolicy& pi, const StateActionTable& q) {
    check_shape(mdp, pi);
    const Shape shape = mdp.shape();
    StateActionTable r_hat(shape);
    for (std::size_t t = 0; t < shape.horizon; ++t) {
        for (std::size_t s = 0; s < shape.num_states; ++s) {
            for (std::size_t a = 0; a < shape.num_actions; ++a) {
                const double r = mdp.reward(s, a);
                r_hat(t, s, a) = 2.0 * r * q(t, s, a) - r * r;
            }
        }
    }
    auto q_hat = evaluate_action_values(mdp, pi, r_hat);
    return {std::move(r_hat), std::move(q_hat)};
}

StateActionTable compute_hat_direct(const TabularMDP& mdp, const TimedPolicy& pi, const QV& qv,
                                    const StateActionTable& nu) {
    const Shape shape = mdp.shape();
    const StateTable w_pi = pdis_variance(mdp, pi, pi, qv, nu);
    StateActionTable q_hat(shape);
    std::vector<double> next(shape.num_states * shape.num_actions, 0.0);
    for (std::size_t t = 0; t < shape.horizon; ++t) {
        if (t + 1 < shape.horizon) expect_next(mdp, w_pi.at_time(t + 1), next);
        else std::fill(next.begin(), next.end(), 0.0);
        const auto q = qv.q.at_time(t);
        const auto n = nu.at_time(t);
        auto out = q_hat.at_time(t);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = next[i] + n[i] + q[i] * q[i];
    }
    return q_hat;
}

StateTable pdis_variance(const TabularMDP& mdp, const TimedPolicy& pi, const TimedPolicy& mu) {
    check_shape(mdp, pi);
    check_shape(mdp, mu);
    const QV qv = compute_q_v(mdp, pi);
    const StateActionTable nu = compute_nu(mdp, qv.v);
    return pdis_variance(mdp, pi, mu, qv, nu);
}

StateTable pdis_variance(const TabularMDP& mdp, const TimedPolicy& pi, const TimedPolicy& mu,
                         const QV& qv, const StateActionTable& nu) {
    check_shape(mdp, pi);
    check_shape(mdp, mu);
    const Shape shape = mdp.shape();
    StateTable w(shape.horizon, shape.num_states);
    std::vector<double> next(shape.num_states * shape.num_actions, 0.0);
    for (std::size_t t = shape.horizon; t-- > 0;) {
        if (t + 1 < shape.horizon) expect_next(mdp, w.at_time(t + 1), next);
        for (std::size_t s = 0; s < shape.num_states; ++s) {
            double second = 0.0;
            for (std::size_t a = 0; a < shape.num_actions; ++a) {
                const double p = pi.prob(t, s, a);
                const double m = mu.prob(t, s, a);
                const double q = qv.q(t, s, a);
                if (m == 0.0) {
                    if (p * q != 0.0) {
                        throw SupportError(t, s, a,
                                           "behavior policy violates pi*q != 0 => mu > 0");
                    }
                    continue;
                }
                second += p * p / m * (next[s * shape.num_actions + a] + nu(t, s, a) + q * q);
            }
            w(t, s) = second - qv.v(t, s) * qv.v(t, s);
        }
    }
    return w;
}

OptimalBehavior optimal_behavior(const TabularMDP& mdp, const TimedPolicy& pi) {
    check_shape(mdp, pi);
    const Shape shape = mdp.shape();
    const QV qv = compute_q_v(mdp, pi);
    const StateActionTable nu = compute_nu(mdp, qv.v);

    StateActionTable u(shape);
    std::vector<double> mu(shape.horizon * shape.num_states * shape.num_actions);
    StateTable w_star(shape.horizon, shape.num_states);
    std::vector<double> next(shape.num_states * shape.num_actions, 0.0);

    for (std::size_t t = shape.horizon; t-- > 0;) {
        if (t + 1 < shape.horizon) expect_next(mdp, w_star.at_time(t + 1), next);
        for (std::size_t s = 0; s < shape.num_states; ++s) {
            auto u_row = u.row(t, s);
            for (std::size_t a = 0; a < shape.num_actions; ++a) {
                const double q = qv.q(t, s, a);
                u_row[a] = next[s * shape.num_actions + a] + nu(t, s, a) + q * q;
            }
            std::span<double> mu_row(mu.data() + (t * shape.num_states + s) * shape.num_actions,
                                     shape.num_actions);
            sqrt_weighted_row(pi.row(t, s), u_row, mu_row);

            double second = 0.0;
            for (std::size_t a = 0; a < shape.num_actions; ++a) {
                if (mu_row[a] == 0.0) continue;
                const double p = pi.prob(t, s, a);
                second += p * p / mu_row[a] * u_row[a];
            }
            w_star(t, s) = second - qv.v(t, s) * qv.v(t, s);
        }
    }
    return {std::move(u), TimedPolicy(shape, std::move(mu)), std::move(w_star)};
}

TimedPolicy mu_hat_exact(const TimedPolicy& pi, const StateActionTable& q_hat) {
    const Shape shape = pi.shape();
    if (!(q_hat.shape() == shape)) throw DimensionError("q_hat does not match policy");
    std::vector<double> mu(shape.horizon * shape.num_states * shape.num_actions);
    for (std::size_t t = 0; t < shape.horizon; ++t) {
        for (std::size_t s = 0; s < shape.num_states; ++s) {
            sqrt_weighted_row(pi.row(t, s), q_hat.row(t, s),
                              {mu.data() + (t * shape.num_states + s) * shape.num_actions,
                               shape.num_actions});
        }
    }
    return TimedPolicy(shape, std::move(mu));
}

EpsilonTables compute_epsilon(const TabularMDP& mdp, const TimedPolicy& pi,
                              const StateActionTable& q_hat) {
    check_shape(mdp, pi);
    const Shape shape = mdp.shape();
    StateTable c(shape.horizon, shape.num_states);
    StateTable eps(shape.horizon, shape.num_states);
    std::vector<double> next(shape.num_states * shape.num_actions, 0.0);
    for (std::size_t t = shape.horizon; t-- > 0;) {
        if (t + 1 < shape.horizon) expect_next(mdp, eps.at_time(t + 1), next);
        for (std::size_t s = 0; s < shape.num_states; ++s) {
            double mean = 0.0;
            double root_mean = 0.0;
            for (std::size_t a = 0; a < shape.num_actions; ++a) {
                const double p = pi.prob(t, s, a);
                const double x = std::max(q_hat(t, s, a), 0.0);
                mean += p * x;
                root_mean += p * std::sqrt(x);
            }
            c(t, s) = mean - root_mean * root_mean;
            double best = 0.0;
            if (t + 1 < shape.horizon) {
                best = std::numeric_limits<double>::infinity();
                for (std::size_t a = 0; a < shape.num_actions; ++a) {
                    best = std::min(best, next[s * shape.num_actions + a]);
                }
            }
            eps(t, s) = c(t, s) + best;
        }
    }
    return {std::move(c), std::move(eps)};
}

ValueTables compute_value_tables(const TabularMDP& mdp, const TimedPolicy& pi) {
    QV qv = compute_q_v(mdp, pi);
    StateActionTable nu = compute_nu(mdp, qv.v);
    TildeTables tilde = compute_tilde(mdp, pi, qv.q, qv.v, nu);
    HatTables hat = compute_hat(mdp, pi, qv.q);
    OptimalBehavior opt = optimal_behavior(mdp, pi);
    StateTable w_var = pdis_variance(mdp, pi, pi, qv, nu);
    EpsilonTables eps = compute_epsilon(mdp, pi, hat.q_hat);
    return {std::move(qv.v),        std::move(qv.q),          std::move(nu),
            std::move(tilde.r_tilde), std::move(tilde.q_tilde), std::move(hat.r_hat),
            std::move(hat.q_hat),   std::move(opt.u),         std::move(w_var),
            std::move(eps.c_cost),  std::move(eps.epsilon)};
}

double expected_return(const TabularMDP& mdp, const StateTable& v) {
    const auto p0 = mdp.initial();
    double sum = 0.0;
    for (std::size_t s = 0; s < p0.size(); ++s) sum += p0[s] * v(0, s);
    return sum;
}

double total_variance(const TabularMDP& mdp, const StateTable& w_var, const StateTable& v) {
    const auto p0 = mdp.initial();
    const double mean = expected_return(mdp, v);
    double within = 0.0;
    double between = 0.0;
    for (std::size_t s = 0; s < p0.size(); ++s) {
        within += p0[s] * w_var(0, s);
        const double d = v(0, s) - mean;
        between += p0[s] * d * d;
    }
    return within + between;
}

namespace {

class Enumerator {
public:
    Enumerator(const TabularMDP& mdp, const TimedPolicy& pi, const TimedPolicy& mu,
               EstimatorKind kind)
        : mdp_(mdp), pi_(pi), mu_(mu), kind_(kind) {}

    void run(std::size_t s0, double& first, double& second) {
        first_ = 0.0;
        second_ = 0.0;
        visit(0, s0, 1.0, 1.0, 0.0, 0.0);
        first = first_;
        second = second_;
    }

private:
    // prob: mu-probability of the prefix; ratio: rho_{0:t-1}; pdis: sum_k rho_{0:k} R_{k+1}
    // so far; plain: undiscounted return so far.
    void visit(std::size_t t, std::size_t s, double prob, double ratio, double pdis,
               double plain) {
        const std::size_t horizon = mdp_.horizon();
        for (std::size_t a = 0; a < mdp_.num_actions(); ++a) {
            const double m = mu_.prob(t, s, a);
            if (m == 0.0) continue;
            const double p_a = prob * m;
            const double rho = ratio * pi_.prob(t, s, a) / m;
            const double r = mdp_.reward(s, a);
            const double next_pdis = pdis + rho * r;
            const double next_plain = plain + r;
            if (t + 1 == horizon) {
                const double g = kind_ == EstimatorKind::PerDecision ? next_pdis : rho * next_plain;
                first_ += p_a * g;
                second_ += p_a * g * g;
                continue;
            }
            const auto row = mdp_.transition_row(s, a);
            for (std::size_t s2 = 0; s2 < row.size(); ++s2) {
                if (row[s2] == 0.0) continue;
                visit(t + 1, s2, p_a * row[s2], rho, next_pdis, next_plain);
            }
        }
    }

    const TabularMDP& mdp_;
    const TimedPolicy& pi_;
    const TimedPolicy& mu_;
    EstimatorKind kind_;
    double first_ = 0.0;
    double second_ = 0.0;
};

} // namespace

Moments brute_force_moments(const TabularMDP& mdp, const TimedPolicy& pi, const TimedPolicy& mu,
                            EstimatorKind kind) {
    check_shape(mdp, pi);
    check_shape(mdp, mu);
    const double horizon = static_cast<double>(mdp.horizon());
    const double count = std::pow(static_cast<double>(mdp.num_states()), horizon) *
                         std::pow(static_cast<double>(mdp.num_actions()), horizon);
    if (count > kEnumerationCap) {
        throw EnumerationInfeasibleError("|S|^T |A|^T exceeds the enumeration cap");
    }
    Moments out{std::vector<double>(mdp.num_states()), std::vector<double>(mdp.num_states())};
    Enumerator enumerator(mdp, pi, mu, kind);
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        double first = 0.0;
        double second = 0.0;
        enumerator.run(s, first, second);
        out.mean[s] = first;
        out.variance[s] = second - first * first;
    }
    return out;
}

} // namespace vrmc::dp
