#pragma once

// The irrevocable packing policy. Arms are ranked once by expected reward
// per expected pull under the relaxed solution; the top k are activated.
// Each active arm replays its own relaxed policy on a private clock (its
// "local time"): at every global step the arm draws actions from the
// occupancy at (state, local time), skipping idle draws without consuming
// global time, until it either commits to a pull or exhausts its local
// schedule. Exhausted arms are discarded for good and replaced by the
// highest-ranked arm still waiting. The result: at most k pulls per step,
// at most n - k changes to the pulled set, and no arm is ever revisited.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "banditpack/arm.hpp"
#include "banditpack/occupancy.hpp"
#include "banditpack/parallel.hpp"
#include "banditpack/relaxation.hpp"
#include "banditpack/rng.hpp"

namespace banditpack {

struct ArmRanking {
    // Arm indices sorted by descending expected_reward / expected_pulls,
    // ties broken by ascending index. ratios[i] belongs to order[i].
    std::vector<int> order;
    std::vector<double> ratios;
    // Arms with (numerically) zero expected pulls; excluded from play.
    std::vector<int> dropped;
};

inline ArmRanking rank_arms(const RelaxedSolution& solution) {
    ArmRanking ranking;
    const int n = static_cast<int>(solution.tables.size());
    for (int i = 0; i < n; ++i) {
        if (solution.tables[i].expected_pulls <= 1e-12)
            ranking.dropped.push_back(i);
        else
            ranking.order.push_back(i);
    }
    std::vector<double> ratio(static_cast<std::size_t>(n), 0.0);
    for (int i : ranking.order)
        ratio[i] = solution.tables[i].expected_reward / solution.tables[i].expected_pulls;
    std::sort(ranking.order.begin(), ranking.order.end(), [&](int a, int b) {
        if (ratio[a] != ratio[b]) return ratio[a] > ratio[b];
        return a < b;
    });
    ranking.ratios.reserve(ranking.order.size());
    for (int i : ranking.order) ranking.ratios.push_back(ratio[i]);
    return ranking;
}

// Draws an action from the occupancy row at (state, local_time), normalized.
// A zero-mass row means the relaxed policy never visits that cell; the arm
// idles there, which advances its local clock toward discard.
inline int sample_local_action(const ArmModel& arm, const OccupancyTable& occupancy, int state,
                               int local_time, Rng& rng) {
    const int A = occupancy.num_actions;
    double total = 0.0;
    for (int a = 0; a < A; ++a) total += occupancy.at(state, a, local_time);
    if (total <= 0.0) return arm.idle_action;
    const double u = rng.uniform() * total;
    double cum = 0.0;
    int last_positive = arm.idle_action;
    for (int a = 0; a < A; ++a) {
        const double w = occupancy.at(state, a, local_time);
        if (w <= 0.0) continue;
        cum += w;
        last_positive = a;
        if (u < cum) return a;
    }
    return last_positive;
}

struct PullRecord {
    int arm = 0;
    int action = 0;
    int state_before = 0;
    int state_after = 0;
    double reward = 0.0;
};

struct PackingRun {
    std::vector<int> active;     // final active set, in ranking order
    std::vector<int> available;  // never activated, in ranking order
    std::vector<int> discarded;  // in discard order
    std::vector<int> local_time;
    std::vector<int> current_state;
    std::vector<int> pending_action;
    double total_reward = 0.0;
    std::vector<std::vector<PullRecord>> pull_log;  // one entry per global step
    // Bookkeeping for the irrevocability oracle.
    std::vector<int> discard_time;  // global step of discard, -1 if never
    int initial_active_count = 0;
    int activations_beyond_initial = 0;
    int budget_k = 0;
};

inline int sample_next_state(const ArmModel& arm, int state, int action, Rng& rng) {
    const auto& row = arm.kernel_row(state, action);
    const double u = rng.uniform();
    double cum = 0.0;
    for (const auto& tr : row) {
        cum += tr.prob;
        if (u < cum) return tr.next;
    }
    return row.back().next;
}

inline PackingRun run_packing(const std::vector<ArmHandle>& arms,
                              const RelaxedSolution& solution, int k, int horizon, Rng& rng) {
    const int n = static_cast<int>(arms.size());
    const ArmRanking ranking = rank_arms(solution);

    PackingRun run;
    run.budget_k = k;
    run.local_time.assign(n, 0);
    run.pending_action.resize(n);
    run.current_state.resize(n);
    run.discard_time.assign(n, -1);
    for (int i = 0; i < n; ++i) {
        run.pending_action[i] = arms[i]->idle_action;
        run.current_state[i] = arms[i]->initial_state;
    }

    const int ranked = static_cast<int>(ranking.order.size());
    const int initial = std::min(k, ranked);
    run.initial_active_count = initial;
    std::vector<int> active(ranking.order.begin(), ranking.order.begin() + initial);
    std::vector<int> available(ranking.order.begin() + initial, ranking.order.end());
    std::size_t next_available = 0;  // front of the available queue

    run.pull_log.resize(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
        // Selection phase: give every active arm a pull action or discard it.
        for (;;) {
            int chosen = -1;
            for (int i : active) {
                if (run.pending_action[i] == arms[i]->idle_action) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0) break;
            const ArmModel& arm = *arms[chosen];
            int& l = run.local_time[chosen];
            int& a = run.pending_action[chosen];
            while (a == arm.idle_action && l < horizon) {
                a = sample_local_action(arm, solution.tables[chosen], run.current_state[chosen],
                                        l, rng);
                ++l;
            }
            if (a == arm.idle_action && l == horizon) {
                active.erase(std::find(active.begin(), active.end(), chosen));
                run.discarded.push_back(chosen);
                run.discard_time[chosen] = t;
                if (next_available < available.size()) {
                    active.push_back(available[next_available]);
                    ++next_available;
                    ++run.activations_beyond_initial;
                }
            }
        }
        // Pull phase.
        for (int i : active) {
            const ArmModel& arm = *arms[i];
            const int a = run.pending_action[i];
            const int s = run.current_state[i];
            const int s2 = sample_next_state(arm, s, a, rng);
            const double r = arm.reward_at(s, a);
            run.total_reward += r;
            run.pull_log[static_cast<std::size_t>(t)].push_back(PullRecord{i, a, s, s2, r});
            run.current_state[i] = s2;
            run.pending_action[i] = arm.idle_action;
        }
    }

    run.active = std::move(active);
    run.available.assign(available.begin() + static_cast<std::ptrdiff_t>(next_available),
                         available.end());
    return run;
}

// Test oracle for the run log: every arm's pulls form one contiguous block
// of global steps, nothing is pulled at or after its discard step, per-step
// pulls respect the budget, and the number of activations beyond the initial
// k never exceeds n - k.
inline bool verify_irrevocability(const PackingRun& run) {
    const int n = static_cast<int>(run.local_time.size());
    const int horizon = static_cast<int>(run.pull_log.size());
    std::vector<std::vector<int>> pull_times(static_cast<std::size_t>(n));
    for (int t = 0; t < horizon; ++t) {
        if (static_cast<int>(run.pull_log[t].size()) > run.budget_k) return false;
        for (const auto& rec : run.pull_log[t]) {
            if (rec.arm < 0 || rec.arm >= n) return false;
            pull_times[rec.arm].push_back(t);
        }
    }
    for (int i = 0; i < n; ++i) {
        const auto& times = pull_times[i];
        for (std::size_t j = 1; j < times.size(); ++j)
            if (times[j] != times[j - 1] + 1) return false;
        if (run.discard_time[i] >= 0 && !times.empty() && times.back() >= run.discard_time[i])
            return false;
    }
    if (run.activations_beyond_initial > n - run.budget_k) return false;
    return true;
}

// Monte-Carlo evaluation of the packing policy. Trajectory j runs on the RNG
// stream derive_seed(seed, j), so any single trajectory can be replayed.
struct SimulationSummary {
    int trajectories = 0;
    double mean_reward = 0.0;
    double std_err = 0.0;
    double discards_mean = 0.0;
    int irrevocability_violations = 0;
};

inline SimulationSummary simulate_many(const std::vector<ArmHandle>& arms,
                                       const RelaxedSolution& solution, int k, int horizon,
                                       int trajectories, std::uint64_t seed, int threads = 1) {
    std::vector<double> rewards(static_cast<std::size_t>(trajectories), 0.0);
    std::vector<int> discards(static_cast<std::size_t>(trajectories), 0);
    std::vector<std::uint8_t> ok(static_cast<std::size_t>(trajectories), 1);
    parallel_for(trajectories, threads, [&](std::int64_t j) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
        PackingRun run = run_packing(arms, solution, k, horizon, rng);
        rewards[static_cast<std::size_t>(j)] = run.total_reward;
        discards[static_cast<std::size_t>(j)] = static_cast<int>(run.discarded.size());
        ok[static_cast<std::size_t>(j)] = verify_irrevocability(run) ? 1 : 0;
    });
    SimulationSummary out;
    out.trajectories = trajectories;
    double sum = 0.0;
    long discard_sum = 0;
    for (int j = 0; j < trajectories; ++j) {
        sum += rewards[static_cast<std::size_t>(j)];
        discard_sum += discards[static_cast<std::size_t>(j)];
        if (!ok[static_cast<std::size_t>(j)]) ++out.irrevocability_violations;
    }
    out.mean_reward = trajectories > 0 ? sum / trajectories : 0.0;
    out.discards_mean = trajectories > 0 ? static_cast<double>(discard_sum) / trajectories : 0.0;
    if (trajectories > 1) {
        double ss = 0.0;
        for (int j = 0; j < trajectories; ++j) {
            const double d = rewards[static_cast<std::size_t>(j)] - out.mean_reward;
            ss += d * d;
        }
        out.std_err = std::sqrt(ss / (static_cast<double>(trajectories) *
                                      (static_cast<double>(trajectories) - 1.0)));
    }
    return out;
}

}  // namespace banditpack
