#pragma once

// Exact ground truth for tiny instances. Two tools:
//
//  * exact_optimal_value: backward induction over the joint state space with
//    per-step action sets restricted to at most k simultaneous pulls. This
//    is the value of the best unrestricted (non-irrevocable) policy. The
//    joint space blows up as |S|^n * T^n, so hard caps guard the entry.
//
//  * exact_pull_count_profile: forward recursion over one arm's chain
//    expanded with a pulls-so-far coordinate, under the normalized policy of
//    a given occupancy table (zero-mass cells idle, matching the packing
//    sampler). Yields the exact expected reward collected on the m-th pull
//    for every m, the quantity behind the decreasing-returns check.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "banditpack/arm.hpp"
#include "banditpack/errors.hpp"
#include "banditpack/occupancy.hpp"

namespace banditpack {

struct OracleCaps {
    std::int64_t max_joint_states = 10000;
    int max_horizon = 6;
    int max_arms = 3;
};

namespace detail {

// Joint actions: every subset of arms of size <= k crossed with each chosen
// arm's non-idle actions. Arms outside the subset idle.
struct JointAction {
    std::vector<std::pair<int, int>> pulls;  // (arm, action)
};

inline void enumerate_joint_actions(const std::vector<ArmHandle>& arms, int k, int first,
                                    JointAction& current, std::vector<JointAction>& out) {
    out.push_back(current);
    if (static_cast<int>(current.pulls.size()) == k) return;
    const int n = static_cast<int>(arms.size());
    for (int i = first; i < n; ++i) {
        for (int a = 0; a < arms[i]->num_actions; ++a) {
            if (a == arms[i]->idle_action) continue;
            current.pulls.emplace_back(i, a);
            enumerate_joint_actions(arms, k, i + 1, current, out);
            current.pulls.pop_back();
        }
    }
}

}  // namespace detail

inline double exact_optimal_value(const std::vector<ArmHandle>& arms, int k, int horizon,
                                  const OracleCaps& caps = {}) {
    const int n = static_cast<int>(arms.size());
    if (n < 1) throw DomainError("exact_optimal_value: no arms");
    if (k < 1 || k > n) throw InvalidBudget("exact_optimal_value: budget outside [1, n]");
    if (n > caps.max_arms)
        throw InstanceTooLarge("exact_optimal_value: " + std::to_string(n) + " arms > cap " +
                               std::to_string(caps.max_arms));
    if (horizon > caps.max_horizon)
        throw InstanceTooLarge("exact_optimal_value: horizon " + std::to_string(horizon) +
                               " > cap " + std::to_string(caps.max_horizon));
    std::int64_t joint = 1;
    for (const auto& arm : arms) {
        joint *= arm->num_states;
        if (joint > caps.max_joint_states)
            throw InstanceTooLarge("exact_optimal_value: joint state space exceeds cap " +
                                   std::to_string(caps.max_joint_states));
    }

    // Mixed-radix joint state index: strides[i] multiplies arm i's state.
    std::vector<std::int64_t> strides(static_cast<std::size_t>(n), 1);
    for (int i = n - 2; i >= 0; --i) strides[i] = strides[i + 1] * arms[i + 1]->num_states;

    std::vector<detail::JointAction> actions;
    {
        detail::JointAction scratch;
        detail::enumerate_joint_actions(arms, k, 0, scratch, actions);
    }

    std::vector<double> value_next(static_cast<std::size_t>(joint), 0.0);
    std::vector<double> value_cur(static_cast<std::size_t>(joint), 0.0);
    std::vector<int> state(static_cast<std::size_t>(n), 0);

    // Expected next-step value of applying `pulls[idx..]` from the current
    // joint index; idling arms contribute their unchanged stride.
    auto expect = [&](auto&& self, const detail::JointAction& act, std::size_t idx,
                      std::int64_t base, double prob) -> double {
        if (idx == act.pulls.size()) return prob * value_next[static_cast<std::size_t>(base)];
        const auto [i, a] = act.pulls[idx];
        double sum = 0.0;
        const std::int64_t without = base - state[i] * strides[i];
        for (const auto& tr : arms[i]->kernel_row(state[i], a))
            sum += self(self, act, idx + 1, without + tr.next * strides[i], prob * tr.prob);
        return sum;
    };

    for (int t = horizon - 1; t >= 0; --t) {
        std::fill(state.begin(), state.end(), 0);
        for (std::int64_t idx = 0; idx < joint; ++idx) {
            double best = 0.0;
            for (const auto& act : actions) {
                double q = 0.0;
                for (const auto& [i, a] : act.pulls) q += arms[i]->reward_at(state[i], a);
                q += expect(expect, act, 0, idx, 1.0);
                if (q > best) best = q;
            }
            value_cur[static_cast<std::size_t>(idx)] = best;
            // advance the mixed-radix counter
            for (int i = n - 1; i >= 0; --i) {
                if (++state[i] < arms[i]->num_states) break;
                state[i] = 0;
            }
        }
        std::swap(value_next, value_cur);
    }

    std::int64_t start = 0;
    for (int i = 0; i < n; ++i) start += arms[i]->initial_state * strides[i];
    return value_next[static_cast<std::size_t>(start)];
}

struct PullCountProfile {
    // increments[m-1] is the expected reward collected on the m-th pull,
    // m = 1..horizon. The entries sum to the occupancy's expected reward.
    std::vector<double> increments;
};

inline PullCountProfile exact_pull_count_profile(const ArmModel& arm,
                                                 const OccupancyTable& occupancy) {
    const int S = arm.num_states;
    const int A = arm.num_actions;
    const int T = occupancy.horizon;
    if (occupancy.num_states != S || occupancy.num_actions != A)
        throw DomainError("exact_pull_count_profile: occupancy shape does not match arm");

    PullCountProfile profile;
    profile.increments.assign(static_cast<std::size_t>(T), 0.0);

    // mass[m][s]: probability of being in state s with m pulls consumed.
    std::vector<std::vector<double>> mass(static_cast<std::size_t>(T) + 1,
                                          std::vector<double>(static_cast<std::size_t>(S), 0.0));
    auto next = mass;
    mass[0][static_cast<std::size_t>(arm.initial_state)] = 1.0;

    for (int t = 0; t < T; ++t) {
        for (auto& row : next) std::fill(row.begin(), row.end(), 0.0);
        for (int m = 0; m <= t; ++m) {
            for (int s = 0; s < S; ++s) {
                const double p = mass[m][static_cast<std::size_t>(s)];
                if (p == 0.0) continue;
                double total = 0.0;
                for (int a = 0; a < A; ++a) total += occupancy.at(s, a, t);
                if (total <= 0.0) {
                    next[m][static_cast<std::size_t>(s)] += p;  // unreachable cell: idle
                    continue;
                }
                for (int a = 0; a < A; ++a) {
                    const double w = occupancy.at(s, a, t);
                    if (w <= 0.0) continue;
                    const double q = p * (w / total);
                    if (a == arm.idle_action) {
                        next[m][static_cast<std::size_t>(s)] += q;
                    } else {
                        profile.increments[static_cast<std::size_t>(m)] +=
                            q * arm.reward_at(s, a);
                        for (const auto& tr : arm.kernel_row(s, a))
                            next[m + 1][static_cast<std::size_t>(tr.next)] += q * tr.prob;
                    }
                }
            }
        }
        std::swap(mass, next);
    }
    return profile;
}

inline bool check_decreasing_returns(const PullCountProfile& profile, double tol) {
    for (std::size_t m = 1; m < profile.increments.size(); ++m)
        if (profile.increments[m] > profile.increments[m - 1] + tol) return false;
    return true;
}

}  // namespace banditpack
