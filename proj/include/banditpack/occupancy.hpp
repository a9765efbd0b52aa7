#pragma once

// State-action frequencies pi(s, a, t) of one arm over the horizon, plus the
// two summaries every consumer needs: expected reward and expected pulls.

#include <cmath>
#include <cstddef>
#include <vector>

#include "banditpack/arm.hpp"

namespace banditpack {

struct OccupancyTable {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    // Flattened [t][s][a]; each t-slice is a probability distribution over
    // (state, action) pairs.
    std::vector<double> values;
    double expected_reward = 0.0;  // sum pi(s,a,t) * r(s,a)
    double expected_pulls = 0.0;   // T - sum_{s,t} pi(s, idle, t)

    OccupancyTable() = default;
    OccupancyTable(int states, int actions, int T)
        : num_states(states), num_actions(actions), horizon(T),
          values(static_cast<std::size_t>(T) * states * actions, 0.0) {}

    std::size_t index(int s, int a, int t) const {
        return (static_cast<std::size_t>(t) * num_states + s) * num_actions + a;
    }
    double at(int s, int a, int t) const { return values[index(s, a, t)]; }
    double& at(int s, int a, int t) { return values[index(s, a, t)]; }

    double slice_sum(int t) const {
        const std::size_t n = static_cast<std::size_t>(num_states) * num_actions;
        const double* p = values.data() + static_cast<std::size_t>(t) * n;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += p[i];
        return sum;
    }
};

// Round-off floor: entries below `floor` are zeroed and each time slice is
// renormalized back to total mass 1.
inline void clamp_small_entries(OccupancyTable& table, double floor = 1e-15) {
    const std::size_t n = static_cast<std::size_t>(table.num_states) * table.num_actions;
    for (int t = 0; t < table.horizon; ++t) {
        double* p = table.values.data() + static_cast<std::size_t>(t) * n;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (p[i] < floor) p[i] = 0.0;
            sum += p[i];
        }
        if (sum > 0.0 && sum != 1.0) {
            const double inv = 1.0 / sum;
            for (std::size_t i = 0; i < n; ++i) p[i] *= inv;
        }
    }
}

inline void recompute_summaries(OccupancyTable& table, const ArmModel& arm) {
    double reward = 0.0;
    double idle_mass = 0.0;
    for (int t = 0; t < table.horizon; ++t) {
        for (int s = 0; s < table.num_states; ++s) {
            for (int a = 0; a < table.num_actions; ++a) {
                const double v = table.at(s, a, t);
                if (v == 0.0) continue;
                reward += v * arm.reward_at(s, a);
                if (a == arm.idle_action) idle_mass += v;
            }
        }
    }
    table.expected_reward = reward;
    table.expected_pulls = static_cast<double>(table.horizon) - idle_mass;
}

// w * a + (1 - w) * b, summaries recomputed from the blended tensor.
inline OccupancyTable blend_tables(const OccupancyTable& a, const OccupancyTable& b, double w,
                                   const ArmModel& arm) {
    OccupancyTable out(a.num_states, a.num_actions, a.horizon);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = w * a.values[i] + (1.0 - w) * b.values[i];
    clamp_small_entries(out);
    recompute_summaries(out, arm);
    return out;
}

// Largest violation of the flow-conservation constraints
//   sum_a pi(s,a,t) = sum_{s',a'} P(s',a',s) pi(s',a',t-1)
// plus the t = 0 marginal against the degenerate initial state. Diagnostic
// hook for tests; a valid table stays below ~1e-9.
inline double flow_residual(const OccupancyTable& table, const ArmModel& arm) {
    const int S = table.num_states, A = table.num_actions;
    double worst = 0.0;
    std::vector<double> inflow(static_cast<std::size_t>(S), 0.0);
    for (int t = 0; t < table.horizon; ++t) {
        if (t == 0) {
            for (int s = 0; s < S; ++s) {
                double marginal = 0.0;
                for (int a = 0; a < A; ++a) marginal += table.at(s, a, 0);
                double want = (s == arm.initial_state) ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(marginal - want));
            }
        } else {
            std::fill(inflow.begin(), inflow.end(), 0.0);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    const double v = table.at(s, a, t - 1);
                    if (v == 0.0) continue;
                    for (const auto& tr : arm.kernel_row(s, a)) inflow[tr.next] += v * tr.prob;
                }
            for (int s = 0; s < S; ++s) {
                double marginal = 0.0;
                for (int a = 0; a < A; ++a) marginal += table.at(s, a, t);
                worst = std::max(worst, std::abs(marginal - inflow[s]));
            }
        }
    }
    return worst;
}

}  // namespace banditpack
