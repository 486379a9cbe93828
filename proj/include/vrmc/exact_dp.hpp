#pragma once

#include <vector>

#include "vrmc/mdp.hpp"
#include "vrmc/tables.hpp"

// Exact backward dynamic programming for the value and variance quantities of
// the per-decision importance sampling (PDIS) estimator in a finite-horizon
// MDP, together with an exhaustive trajectory-enumeration oracle.
//
// Notation used throughout (all time-major, t = 0..T-1):
//   q, v      action / state values of the target policy pi
//   nu        variance of v_{t+1}(S_{t+1}) given (s, a); zero at t = T-1
//   r_tilde   nu + q^2 - v^2
//   q_tilde   action value of pi under reward r_tilde
//   r_hat     2 r q - r^2
//   q_hat     action value of pi under reward r_hat  (= q_tilde + v^2)
//   u         q_hat analogue that assumes the optimal behavior policy downstream
//   w_var     Var(G^PDIS | S_t = s) for a given behavior policy
//   c_cost    sum_a pi q_hat - (sum_a pi sqrt(q_hat))^2
//   epsilon   guaranteed per-state variance reduction of mu_hat over pi

namespace vrmc::dp {

struct QV {
    StateActionTable q;
    StateTable v;
};

struct TildeTables {
    StateActionTable r_tilde;
    StateActionTable q_tilde;
};

struct HatTables {
    StateActionTable r_hat;
    StateActionTable q_hat;
};

struct OptimalBehavior {
    StateActionTable u;
    TimedPolicy mu_star;
    StateTable w_var_star;
};

struct EpsilonTables {
    StateTable c_cost;
    StateTable epsilon;
};

/// Every quantity for one (mdp, pi) pair; w_var is the on-policy variance.
struct ValueTables {
    StateTable v;
    StateActionTable q;
    StateActionTable nu;
    StateActionTable r_tilde;
    StateActionTable q_tilde;
    StateActionTable r_hat;
    StateActionTable q_hat;
    StateActionTable u;
    StateTable w_var;
    StateTable c_cost;
    StateTable epsilon;
};

/// Backward recursion q_t = r + P v_{t+1}, q_{T-1} = r, v_t = sum_a pi_t q_t.
QV compute_q_v(const TabularMDP& mdp, const TimedPolicy& pi);

/// nu_t(s, a) = Var_{s' ~ p(.|s,a)} v_{t+1}(s'), computed in centered form.
StateActionTable compute_nu(const TabularMDP& mdp, const StateTable& v);

TildeTables compute_tilde(const TabularMDP& mdp, const TimedPolicy& pi, const StateActionTable& q,
                          const StateTable& v, const StateActionTable& nu);

/// q_hat through its own Bellman recursion with reward r_hat = 2 r q - r^2.
HatTables compute_hat(const TabularMDP& mdp, const TimedPolicy& pi, const StateActionTable& q);

/// q_hat from its definition: sum_s' p Var(G^PDIS under pi | S_{t+1} = s') + nu + q^2.
StateActionTable compute_hat_direct(const TabularMDP& mdp, const TimedPolicy& pi,
                                    const QV& qv, const StateActionTable& nu);

/**
 * Var(G^PDIS | S_t = s) when behaving with mu and evaluating pi.
 *
 * Requires mu_t(a|s) = 0  =>  pi_t(a|s) q_t(s,a) = 0 (exact test); throws
 * SupportError naming the first offending (t, s, a) otherwise.
 */
StateTable pdis_variance(const TabularMDP& mdp, const TimedPolicy& pi, const TimedPolicy& mu);

/// As above with q, v and nu already computed for (mdp, pi).
StateTable pdis_variance(const TabularMDP& mdp, const TimedPolicy& pi, const TimedPolicy& mu,
                         const QV& qv, const StateActionTable& nu);

/// Jointly backward: u_t, mu*_t proportional to pi_t sqrt(u_t), and Var under mu*.
OptimalBehavior optimal_behavior(const TabularMDP& mdp, const TimedPolicy& pi);

/// mu_hat_t proportional to pi_t sqrt(q_hat_t); uniform where the normalizer vanishes.
TimedPolicy mu_hat_exact(const TimedPolicy& pi, const StateActionTable& q_hat);

EpsilonTables compute_epsilon(const TabularMDP& mdp, const TimedPolicy& pi,
                              const StateActionTable& q_hat);

/// Computes every table for (mdp, pi); w_var is the on-policy PDIS variance.
ValueTables compute_value_tables(const TabularMDP& mdp, const TimedPolicy& pi);

/// Var(G^PDIS) with S_0 ~ p0: E_{p0}[w_var_0] + Var_{p0}(v_0).
double total_variance(const TabularMDP& mdp, const StateTable& w_var, const StateTable& v);

/// J(pi) = sum_s p0(s) v_0(s).
double expected_return(const TabularMDP& mdp, const StateTable& v);

enum class EstimatorKind { PerDecision, Ordinary };

/// Mean and variance of an estimator conditioned on each initial state.
struct Moments {
    std::vector<double> mean;
    std::vector<double> variance;
};

/// Largest |S|^T |A|^T accepted by brute_force_moments.
inline constexpr double kEnumerationCap = 1e6;

/**
 * Exhaustively enumerates every trajectory with positive probability under mu
 * from each initial state and returns the exact conditional moments of the
 * chosen estimator. Independent of the recursions above.
 */
Moments brute_force_moments(const TabularMDP& mdp, const TimedPolicy& pi, const TimedPolicy& mu,
                            EstimatorKind kind);

} // namespace vrmc::dp
