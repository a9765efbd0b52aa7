#pragma once

// Solver for the budget-relaxed planning problem ("RLP"): instead of at most
// k pulls per step, a policy may spend at most k*T pulls in expectation over
// the whole horizon. The relaxation decomposes per arm once the coupling
// constraint is dualized with a multiplier lambda >= 0:
//
//   g(lambda) = lambda*k*T + sum_i max_pi ( R_i(pi) - lambda * T_i(pi) )
//
// where each inner maximum is a finite-horizon dynamic program over one
// arm's states with every non-idle action's reward reduced by lambda. g is
// convex in lambda and, by weak duality, an upper bound on the relaxed
// optimum for every lambda.
//
// g can be non-differentiable at its minimizer, so minimizing it does not by
// itself produce a feasible near-optimal occupancy. The solver instead
// bisects on lambda while maintaining a bracket
//   sum_i T_i(pi(lambda_feas)) <= kT < sum_i T_i(pi(lambda_infeas)),
// and on termination blends the two bracket solutions with the convex weight
// that lands the pull budget exactly on kT (or alpha = 1 when the
// unconstrained lambda = 0 solution is already feasible). The blend is a
// valid occupancy because the flow constraints are linear, and its value is
// within 2*epsilon of the relaxed optimum, certified by
// min(g(lambda_feas), g(lambda_infeas)).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "banditpack/arm.hpp"
#include "banditpack/errors.hpp"
#include "banditpack/occupancy.hpp"
#include "banditpack/parallel.hpp"

namespace banditpack {

struct ArmSubproblemSolution {
    OccupancyTable table;
    double objective = 0.0;  // max of R_i(pi) - lambda * T_i(pi)
};

namespace detail {

// Deterministic penalized policy plus the scalars the bisection branches on.
// The full occupancy tensor is materialized separately, only where a caller
// keeps it.
struct ArmPolicySolve {
    std::vector<std::int32_t> policy;  // action per [t * S + s]
    double objective = 0.0;
    double expected_pulls = 0.0;
    double expected_reward = 0.0;
};

// Forward reach propagation under a fixed policy; fills `table` when given.
inline void forward_pass(const ArmModel& arm, const std::vector<std::int32_t>& policy,
                         int horizon, double& pulls, double& reward, OccupancyTable* table) {
    const int S = arm.num_states;
    std::vector<double> reach(static_cast<std::size_t>(S), 0.0);
    std::vector<double> reach_next(static_cast<std::size_t>(S), 0.0);
    reach[arm.initial_state] = 1.0;
    double idle_mass = 0.0;
    reward = 0.0;
    for (int t = 0; t < horizon; ++t) {
        std::fill(reach_next.begin(), reach_next.end(), 0.0);
        for (int s = 0; s < S; ++s) {
            const double p = reach[s];
            if (p == 0.0) continue;
            const int a = policy[static_cast<std::size_t>(t) * S + s];
            if (table) table->at(s, a, t) = p;
            reward += p * arm.reward_at(s, a);
            if (a == arm.idle_action) {
                idle_mass += p;
                reach_next[s] += p;
            } else {
                for (const auto& tr : arm.kernel_row(s, a)) reach_next[tr.next] += p * tr.prob;
            }
        }
        std::swap(reach, reach_next);
    }
    pulls = static_cast<double>(horizon) - idle_mass;
}

// Backward induction with pull rewards penalized by lambda. Argmax ties
// prefer the idle action, then the lowest action index; the fixed rule makes
// the total pull count a nonincreasing function of lambda.
inline ArmPolicySolve solve_arm_policy(const ArmModel& arm, double lambda, int horizon) {
    const int S = arm.num_states, A = arm.num_actions;
    ArmPolicySolve out;
    out.policy.assign(static_cast<std::size_t>(S) * horizon, arm.idle_action);
    std::vector<double> value_next(static_cast<std::size_t>(S), 0.0);
    std::vector<double> value_cur(static_cast<std::size_t>(S), 0.0);

    for (int t = horizon - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            double best = value_next[s];  // idle: zero reward, stay put
            int best_a = arm.idle_action;
            for (int a = 0; a < A; ++a) {
                if (a == arm.idle_action) continue;
                double q = arm.reward_at(s, a) - lambda;
                for (const auto& tr : arm.kernel_row(s, a)) q += tr.prob * value_next[tr.next];
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            value_cur[s] = best;
            out.policy[static_cast<std::size_t>(t) * S + s] = best_a;
        }
        std::swap(value_next, value_cur);
    }
    out.objective = value_next[arm.initial_state];
    forward_pass(arm, out.policy, horizon, out.expected_pulls, out.expected_reward, nullptr);
    return out;
}

inline OccupancyTable occupancy_from_policy(const ArmModel& arm,
                                            const std::vector<std::int32_t>& policy,
                                            int horizon) {
    OccupancyTable table(arm.num_states, arm.num_actions, horizon);
    double pulls = 0.0, reward = 0.0;
    forward_pass(arm, policy, horizon, pulls, reward, &table);
    clamp_small_entries(table);
    recompute_summaries(table, arm);
    return table;
}

}  // namespace detail

// Penalized backward induction followed by a forward occupancy pass from the
// degenerate initial state.
inline ArmSubproblemSolution solve_arm_subproblem(const ArmModel& arm, double lambda,
                                                  int horizon) {
    detail::ArmPolicySolve solve = detail::solve_arm_policy(arm, lambda, horizon);
    return {detail::occupancy_from_policy(arm, solve.policy, horizon), solve.objective};
}

// g(lambda) = lambda*k*T + sum of per-arm subproblem optima.
inline double dual_value(const std::vector<ArmHandle>& arms, double lambda, int k, int horizon,
                         int threads = 1) {
    std::vector<double> objectives(arms.size(), 0.0);
    parallel_for(static_cast<std::int64_t>(arms.size()), threads, [&](std::int64_t i) {
        objectives[static_cast<std::size_t>(i)] =
            detail::solve_arm_policy(*arms[static_cast<std::size_t>(i)], lambda, horizon)
                .objective;
    });
    double g = lambda * static_cast<double>(k) * horizon;
    for (double v : objectives) g += v;
    return g;
}

struct RelaxedSolution {
    std::vector<OccupancyTable> tables;  // blended occupancy per arm
    double lambda_feas = 0.0;
    double lambda_infeas = 0.0;
    double dual_value = 0.0;  // min(g(lambda_feas), g(lambda_infeas))
    double alpha_blend = 0.0;
    double epsilon = 0.0;
    int bisection_iterations = 0;

    double total_expected_reward() const {
        double sum = 0.0;
        for (const auto& t : tables) sum += t.expected_reward;
        return sum;
    }
    double total_expected_pulls() const {
        double sum = 0.0;
        for (const auto& t : tables) sum += t.expected_pulls;
        return sum;
    }
};

namespace detail {

// One side of the bisection bracket. Policies are kept instead of occupancy
// tensors; the tensors are materialized once, after the bracket closes.
struct BracketSide {
    double lambda = 0.0;
    std::vector<ArmPolicySolve> solutions;
    double total_pulls = 0.0;
    double total_reward = 0.0;

    double dual(double budget) const {
        return lambda * budget + total_reward - lambda * total_pulls;
    }
};

inline BracketSide solve_all_arms(const std::vector<ArmHandle>& arms, double lambda,
                                  int horizon, int threads) {
    BracketSide side;
    side.lambda = lambda;
    side.solutions.resize(arms.size());
    parallel_for(static_cast<std::int64_t>(arms.size()), threads, [&](std::int64_t i) {
        side.solutions[static_cast<std::size_t>(i)] =
            solve_arm_policy(*arms[static_cast<std::size_t>(i)], lambda, horizon);
    });
    for (const auto& s : side.solutions) {
        side.total_pulls += s.expected_pulls;
        side.total_reward += s.expected_reward;
    }
    return side;
}

}  // namespace detail

// Bisection solver. Terminates once lambda_feas - lambda_infeas <= eps/(kT);
// the feasibility branch compares the exact computed pull sum against kT so
// the bracket invariant never erodes.
inline RelaxedSolution solve_rlp(const std::vector<ArmHandle>& arms, int k, int horizon,
                                 double epsilon, int threads = 1) {
    const int n = static_cast<int>(arms.size());
    if (k < 1 || k > n)
        throw InvalidBudget("solve_rlp: budget k=" + std::to_string(k) + " outside [1, " +
                            std::to_string(n) + "]");
    if (!(epsilon > 0.0)) throw DomainError("solve_rlp: epsilon must be positive");
    if (horizon < 1) throw DomainError("solve_rlp: horizon must be >= 1");

    const double budget = static_cast<double>(k) * horizon;
    RelaxedSolution out;
    out.epsilon = epsilon;

    detail::BracketSide infeas = detail::solve_all_arms(arms, 0.0, horizon, threads);
    if (infeas.total_pulls <= budget) {
        // The unconstrained optimum already fits the budget.
        out.tables.resize(arms.size());
        parallel_for(static_cast<std::int64_t>(arms.size()), threads, [&](std::int64_t i) {
            out.tables[static_cast<std::size_t>(i)] = detail::occupancy_from_policy(
                *arms[static_cast<std::size_t>(i)], infeas.solutions[static_cast<std::size_t>(i)].policy,
                horizon);
        });
        out.lambda_feas = 0.0;
        out.lambda_infeas = 0.0;
        out.alpha_blend = 1.0;
        out.dual_value = infeas.total_reward;
        return out;
    }

    double r_max = 0.0;
    for (const auto& arm : arms) r_max = std::max(r_max, arm->max_reward());
    const double delta = std::max(1.0, r_max) * 1e-3;
    detail::BracketSide feas = detail::solve_all_arms(arms, r_max + delta, horizon, threads);

    const double gap_target = epsilon / budget;
    int iterations = 0;
    while (feas.lambda - infeas.lambda > gap_target) {
        const double lambda = 0.5 * (feas.lambda + infeas.lambda);
        detail::BracketSide mid = detail::solve_all_arms(arms, lambda, horizon, threads);
        if (mid.total_pulls > budget) {
            infeas = std::move(mid);
        } else {
            feas = std::move(mid);
        }
        ++iterations;
    }

    double alpha = 0.0;
    const double denom = infeas.total_pulls - feas.total_pulls;
    if (denom > 0.0) alpha = std::min(1.0, (budget - feas.total_pulls) / denom);

    out.tables.resize(arms.size());
    parallel_for(static_cast<std::int64_t>(arms.size()), threads, [&](std::int64_t j) {
        const auto i = static_cast<std::size_t>(j);
        out.tables[i] = blend_tables(
            detail::occupancy_from_policy(*arms[i], infeas.solutions[i].policy, horizon),
            detail::occupancy_from_policy(*arms[i], feas.solutions[i].policy, horizon), alpha,
            *arms[i]);
    });
    out.lambda_feas = feas.lambda;
    out.lambda_infeas = infeas.lambda;
    out.alpha_blend = alpha;
    out.dual_value = std::min(feas.dual(budget), infeas.dual(budget));
    out.bisection_iterations = iterations;
    return out;
}

// Diagnostic: total expected pulls of the per-arm optima along an ascending
// lambda grid. With the solver's fixed tie-breaking the sequence is
// nonincreasing (the budget slack is a subgradient of g).
inline std::vector<std::pair<double, double>> pull_schedule_monotonicity_probe(
    const std::vector<ArmHandle>& arms, [[maybe_unused]] int k, int horizon,
    const std::vector<double>& lambda_grid) {
    std::vector<std::pair<double, double>> result;
    result.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        if (lambda < 0.0)
            throw DomainError("pull_schedule_monotonicity_probe: lambda must be nonnegative");
        double pulls = 0.0;
        for (const auto& arm : arms)
            pulls += solve_arm_subproblem(*arm, lambda, horizon).table.expected_pulls;
        result.emplace_back(lambda, pulls);
    }
    return result;
}

}  // namespace banditpack
