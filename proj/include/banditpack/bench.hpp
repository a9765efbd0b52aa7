#pragma once

// Generative benchmark family: n coin arms split into statistically
// identical groups. Per group, the prior shape alpha is drawn uniformly,
// the scale beta is solved so the Beta prior hits a target coefficient of
// variation, and the per-success reward is drawn uniformly. Instances are
// evaluated by solving the relaxation once and Monte-Carlo-simulating the
// packing policy, reporting the ratio of the simulated mean to the certified
// dual upper bound.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "banditpack/arm.hpp"
#include "banditpack/errors.hpp"
#include "banditpack/instance.hpp"
#include "banditpack/packing.hpp"
#include "banditpack/relaxation.hpp"
#include "banditpack/rng.hpp"

namespace banditpack {

struct GenerativeConfig {
    int n = 100;
    int k = 10;
    int horizon = 25;
    int groups = 10;
    double cv = 1.0;
    int m = 2;
    double alpha_min = 0.05;
    double alpha_max = 0.35;
    double reward_min = 0.0;
    double reward_max = 2.0;
    int instances = 10;
    int trajectories = 1000;
    std::uint64_t base_seed = 0;
};

// Solves cv^2 = (1 - mu) / (mu * (alpha + beta + 1)) with mu = alpha/(alpha+beta)
// for beta, which reduces to beta = cv^2 * alpha * (alpha + 1) / (1 - cv^2 * alpha).
// A positive root exists iff cv^2 * alpha < 1.
inline double beta_params_for_cv(double alpha, double cv) {
    if (!(alpha > 0.0) || !(cv > 0.0))
        throw DomainError("beta_params_for_cv: alpha and cv must be positive");
    const double c = cv * cv;
    const double denom = 1.0 - c * alpha;
    if (denom <= 0.0)
        throw InfeasibleCV("beta_params_for_cv: no positive beta reaches cv=" +
                           std::to_string(cv) + " at alpha=" + std::to_string(alpha));
    return c * alpha * (alpha + 1.0) / denom;
}

namespace detail {

// Uniform alpha draw restricted to the cv-feasible part of the range.
// Infeasible draws are rejected and redrawn; if even the lower end of the
// range cannot reach the target cv there is nothing to sample.
inline double draw_feasible_alpha(Rng& rng, double lo, double hi, double cv) {
    if (cv * cv * lo >= 1.0)
        throw InfeasibleCV("generate_instance: no alpha in [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "] reaches cv=" + std::to_string(cv));
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const double alpha = rng.uniform(lo, hi);
        if (cv * cv * alpha < 1.0) return alpha;
    }
    throw InfeasibleCV("generate_instance: feasible alpha region too small for cv=" +
                       std::to_string(cv));
}

}  // namespace detail

inline BanditInstance generate_instance(const GenerativeConfig& config, std::uint64_t seed) {
    if (config.n < 1 || config.k < 1 || config.horizon < 1 || config.groups < 1)
        throw DomainError("generate_instance: n, k, horizon, groups must be >= 1");
    if (config.m < 1) throw DomainError("generate_instance: m must be >= 1");
    if (!(config.cv > 0.0)) throw DomainError("generate_instance: cv must be positive");
    if (!(config.alpha_min > 0.0) || !(config.alpha_max > config.alpha_min))
        throw DomainError("generate_instance: alpha range must be positive-length, > 0");
    if (config.reward_min < 0.0 || !(config.reward_max > config.reward_min))
        throw DomainError("generate_instance: reward range must be positive-length, >= 0");

    const int groups = std::min(config.groups, config.n);
    const int base = config.n / groups;
    const int extra = config.n % groups;

    BanditInstance instance;
    instance.horizon = config.horizon;
    instance.budget_k = config.k;
    instance.meta = InstanceMeta{seed, config.cv, groups, config.m};
    instance.arms.reserve(static_cast<std::size_t>(config.n));

    Rng rng(seed);
    for (int g = 0; g < groups; ++g) {
        const double alpha =
            detail::draw_feasible_alpha(rng, config.alpha_min, config.alpha_max, config.cv);
        const double beta = beta_params_for_cv(alpha, config.cv);
        const double reward = rng.uniform(config.reward_min, config.reward_max);
        CoinSpec spec{config.m, alpha, beta, reward, config.horizon};
        auto model = std::make_shared<const ArmModel>(build_coin_arm(spec));
        const int size = base + (g < extra ? 1 : 0);
        for (int j = 0; j < size; ++j) instance.arms.push_back(InstanceArm{model, spec});
    }
    return instance;
}

struct EvalResult {
    std::uint64_t instance_seed = 0;
    double packing_mean = 0.0;
    double std_err = 0.0;
    double dual_bound = 0.0;
    double ratio = 0.0;
    double discards_mean = 0.0;
    int irrevocability_violations = 0;
};

inline EvalResult evaluate(const BanditInstance& instance, double epsilon, int trajectories,
                           std::uint64_t seed, int threads = 1) {
    if (trajectories < 2) throw DomainError("evaluate: need at least 2 trajectories");
    const auto models = instance.models();
    RelaxedSolution solution =
        solve_rlp(models, instance.budget_k, instance.horizon, epsilon, threads);
    SimulationSummary sim = simulate_many(models, solution, instance.budget_k,
                                          instance.horizon, trajectories, seed, threads);
    EvalResult out;
    out.instance_seed = instance.meta ? instance.meta->seed : seed;
    out.packing_mean = sim.mean_reward;
    out.std_err = sim.std_err;
    out.dual_bound = solution.dual_value;
    out.ratio = out.dual_bound > 0.0 ? out.packing_mean / out.dual_bound : 1.0;
    out.discards_mean = sim.discards_mean;
    out.irrevocability_violations = sim.irrevocability_violations;
    return out;
}

struct BenchReport {
    GenerativeConfig config;
    std::vector<EvalResult> per_instance;
    double aggregate_ratio = 0.0;
    double confidence_half_width = 0.0;  // 98% normal approximation
};

inline BenchReport run_bench(const GenerativeConfig& config, double epsilon, int threads = 1) {
    BenchReport report;
    report.config = config;
    report.per_instance.reserve(static_cast<std::size_t>(config.instances));
    for (int i = 0; i < config.instances; ++i) {
        const std::uint64_t instance_seed = derive_seed(config.base_seed, 2 * i);
        const std::uint64_t sim_seed = derive_seed(config.base_seed, 2 * i + 1);
        BanditInstance instance = generate_instance(config, instance_seed);
        report.per_instance.push_back(
            evaluate(instance, epsilon, config.trajectories, sim_seed, threads));
    }
    const int count = static_cast<int>(report.per_instance.size());
    double sum = 0.0;
    for (const auto& row : report.per_instance) sum += row.ratio;
    report.aggregate_ratio = count > 0 ? sum / count : 0.0;
    if (count > 1) {
        double ss = 0.0;
        for (const auto& row : report.per_instance) {
            const double d = row.ratio - report.aggregate_ratio;
            ss += d * d;
        }
        const double se = std::sqrt(ss / (static_cast<double>(count) * (count - 1.0)));
        report.confidence_half_width = 2.326 * se;
    }
    return report;
}

}  // namespace banditpack
