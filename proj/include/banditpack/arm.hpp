#pragma once

// Tabular single-arm MDP with a distinguished idle action, and the
// Beta-Binomial "coin" arm built by enumerating the reachable posterior
// lattice up to the horizon.
//
// Idle semantics are global: reward(s, idle) = 0 and the idle transition is
// a self-loop with probability 1, for every state of every arm. An idled arm
// neither earns nor moves.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "banditpack/errors.hpp"

namespace banditpack {

struct Transition {
    int next = 0;
    double prob = 0.0;
};

// Immutable after construction; safe to share across threads.
struct ArmModel {
    int num_states = 0;
    int num_actions = 0;
    int idle_action = 0;
    int initial_state = 0;
    std::vector<double> reward;                   // [s * num_actions + a]
    std::vector<std::vector<Transition>> kernel;  // [s * num_actions + a], sparse rows

    double reward_at(int s, int a) const {
        return reward[static_cast<std::size_t>(s) * num_actions + a];
    }
    const std::vector<Transition>& kernel_row(int s, int a) const {
        return kernel[static_cast<std::size_t>(s) * num_actions + a];
    }
    double max_reward() const {
        double r = 0.0;
        for (double v : reward) r = std::max(r, v);
        return r;
    }
};

using ArmHandle = std::shared_ptr<const ArmModel>;

// Coin arm: a Binomial(m, P) payoff source with unknown P under a
// Beta(alpha0, beta0) prior. One pull runs m trials, pays
// reward_scale per success, and advances the posterior.
struct CoinSpec {
    int m = 1;
    double alpha0 = 1.0;
    double beta0 = 1.0;
    double reward_scale = 1.0;
    int horizon = 1;
};

// Action layout of coin arms.
inline constexpr int kCoinPullAction = 0;
inline constexpr int kCoinIdleAction = 1;

// States of a coin arm: one layer per pull depth d in [0, horizon], the layer
// at depth d holding m*d+1 states keyed by the success count j.
inline int coin_layer_offset(int depth, int m) {
    return depth + m * depth * (depth - 1) / 2;
}
inline int coin_state_count(int horizon, int m) {
    return (horizon + 1) + m * horizon * (horizon + 1) / 2;
}

namespace detail {

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}
inline double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

// Posterior predictive P(successes = j) of a Binomial(m, P) draw with
// P ~ Beta(alpha, beta):  C(m,j) * B(alpha+j, beta+m-j) / B(alpha, beta).
// Evaluated in log space; the j-row sums to 1 within 1e-12.
inline double coin_predictive(double alpha, double beta, int m, int j) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw DomainError("coin_predictive: prior parameters must be positive");
    if (m < 1 || j < 0 || j > m)
        throw DomainError("coin_predictive: need 0 <= j <= m, m >= 1");
    double lp = detail::log_choose(m, j) + detail::log_beta(alpha + j, beta + m - j) -
                detail::log_beta(alpha, beta);
    return std::exp(lp);
}

struct TabularBuildReport {
    // True when caller-supplied idle rows deviated from the canonical idle
    // semantics and were overwritten.
    bool idle_rows_canonicalized = false;
};

// Validates and assembles a tabular arm from dense reward (S x A) and kernel
// (S x A x S) tables. Non-idle kernel rows must sum to 1 within 1e-9 (they
// are renormalized to remove the residual); idle rows are forced to the
// canonical zero-reward self-loop, with the overwrite flagged in `report`.
inline ArmModel build_tabular_arm(int num_states, int num_actions, int idle_action,
                                  const std::vector<double>& reward,
                                  const std::vector<double>& kernel, int initial_state,
                                  TabularBuildReport* report = nullptr) {
    if (num_states < 1 || num_actions < 1)
        throw DomainError("build_tabular_arm: need at least one state and one action");
    if (idle_action < 0 || idle_action >= num_actions)
        throw DomainError("build_tabular_arm: idle action index out of range");
    if (initial_state < 0 || initial_state >= num_states)
        throw DomainError("build_tabular_arm: initial state index out of range");
    const std::size_t S = static_cast<std::size_t>(num_states);
    const std::size_t A = static_cast<std::size_t>(num_actions);
    if (reward.size() != S * A)
        throw DomainError("build_tabular_arm: reward table has wrong shape");
    if (kernel.size() != S * A * S)
        throw DomainError("build_tabular_arm: kernel tensor has wrong shape");

    ArmModel arm;
    arm.num_states = num_states;
    arm.num_actions = num_actions;
    arm.idle_action = idle_action;
    arm.initial_state = initial_state;
    arm.reward.assign(S * A, 0.0);
    arm.kernel.assign(S * A, {});

    bool canonicalized = false;
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            const std::size_t cell = static_cast<std::size_t>(s) * A + a;
            const double* row = kernel.data() + cell * S;
            if (a == idle_action) {
                if (std::abs(reward[cell]) > 1e-12) canonicalized = true;
                for (int s2 = 0; s2 < num_states; ++s2) {
                    double want = (s2 == s) ? 1.0 : 0.0;
                    if (std::abs(row[s2] - want) > 1e-12) canonicalized = true;
                }
                arm.reward[cell] = 0.0;
                arm.kernel[cell] = {Transition{s, 1.0}};
                continue;
            }
            if (reward[cell] < 0.0)
                throw NegativeReward("build_tabular_arm: reward(" + std::to_string(s) + "," +
                                     std::to_string(a) + ") is negative");
            arm.reward[cell] = reward[cell];
            double sum = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) {
                if (row[s2] < 0.0)
                    throw NonStochasticRow("build_tabular_arm: negative kernel entry in row (" +
                                           std::to_string(s) + "," + std::to_string(a) + ")");
                sum += row[s2];
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw NonStochasticRow("build_tabular_arm: kernel row (" + std::to_string(s) +
                                       "," + std::to_string(a) + ") sums to " +
                                       std::to_string(sum));
            auto& out = arm.kernel[cell];
            for (int s2 = 0; s2 < num_states; ++s2)
                if (row[s2] > 0.0) out.push_back(Transition{s2, row[s2] / sum});
        }
    }
    if (report) report->idle_rows_canonicalized = canonicalized;
    return arm;
}

// Builds the posterior-lattice MDP of a coin. State (d, j) is the posterior
// Beta(alpha0 + j, beta0 + m*d - j) after d pulls with j total successes;
// layers run from depth 0 (the prior, which is the initial state) to depth
// horizon. The pull action pays reward_scale * m * mean(posterior) and moves
// down one layer via the posterior predictive; depth-horizon states are
// absorbing so every kernel row stays stochastic. Pull rewards form a
// martingale along pull transitions.
inline ArmModel build_coin_arm(const CoinSpec& spec) {
    if (spec.m < 1) throw DomainError("build_coin_arm: m must be >= 1");
    if (!(spec.alpha0 > 0.0) || !(spec.beta0 > 0.0))
        throw DomainError("build_coin_arm: prior pseudo-counts must be positive");
    if (spec.reward_scale < 0.0)
        throw DomainError("build_coin_arm: reward_scale must be nonnegative");
    if (spec.horizon < 1) throw DomainError("build_coin_arm: horizon must be >= 1");

    const int T = spec.horizon;
    const int m = spec.m;
    const int S = coin_state_count(T, m);

    ArmModel arm;
    arm.num_states = S;
    arm.num_actions = 2;
    arm.idle_action = kCoinIdleAction;
    arm.initial_state = 0;
    arm.reward.assign(static_cast<std::size_t>(S) * 2, 0.0);
    arm.kernel.assign(static_cast<std::size_t>(S) * 2, {});

    for (int d = 0; d <= T; ++d) {
        const int offset = coin_layer_offset(d, m);
        for (int j = 0; j <= m * d; ++j) {
            const int s = offset + j;
            const double alpha = spec.alpha0 + j;
            const double beta = spec.beta0 + static_cast<double>(m) * d - j;
            const std::size_t pull = static_cast<std::size_t>(s) * 2 + kCoinPullAction;
            const std::size_t idle = static_cast<std::size_t>(s) * 2 + kCoinIdleAction;
            arm.reward[pull] = spec.reward_scale * m * alpha / (alpha + beta);
            arm.kernel[idle] = {Transition{s, 1.0}};
            if (d == T) {
                arm.kernel[pull] = {Transition{s, 1.0}};
                continue;
            }
            auto& row = arm.kernel[pull];
            row.reserve(static_cast<std::size_t>(m) + 1);
            double sum = 0.0;
            for (int x = 0; x <= m; ++x) {
                double p = coin_predictive(alpha, beta, m, x);
                row.push_back(Transition{coin_layer_offset(d + 1, m) + j + x, p});
                sum += p;
            }
            for (auto& tr : row) tr.prob /= sum;
        }
    }
    return arm;
}

}  // namespace banditpack
