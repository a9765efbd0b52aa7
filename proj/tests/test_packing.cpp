#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "banditpack/packing.hpp"
#include "banditpack/relaxation.hpp"
#include "test_support.hpp"

using namespace banditpack;
using testsupport::deterministic_arm;
using testsupport::example_pair;

namespace {

// Hand-built single-state solution: arm i pulls with probability 1 at local
// times < pull_steps[i] and idles afterwards.
RelaxedSolution schedule_solution(const std::vector<ArmHandle>& arms,
                                  const std::vector<int>& pull_steps, int horizon) {
    RelaxedSolution sol;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        OccupancyTable table(arms[i]->num_states, arms[i]->num_actions, horizon);
        for (int t = 0; t < horizon; ++t) {
            const int a = t < pull_steps[i] ? 0 : arms[i]->idle_action;
            table.at(0, a, t) = 1.0;
        }
        recompute_summaries(table, *arms[i]);
        sol.tables.push_back(std::move(table));
    }
    return sol;
}

}  // namespace

TEST_CASE("ranking orders by reward-per-pull with index tie-break") {
    auto make_solution = [](std::vector<std::pair<double, double>> rt) {
        RelaxedSolution sol;
        for (auto [r, t] : rt) {
            OccupancyTable table(1, 2, 1);
            table.expected_reward = r;
            table.expected_pulls = t;
            sol.tables.push_back(table);
        }
        return sol;
    };
    SECTION("distinct ratios") {
        auto ranking = rank_arms(make_solution({{2.0, 1.0}, {1.0, 1.0}}));
        CHECK(ranking.order == std::vector<int>{0, 1});
        CHECK(ranking.dropped.empty());
        CHECK(ranking.ratios[0] == 2.0);
    }
    SECTION("ties break by index") {
        auto ranking = rank_arms(make_solution({{1.0, 1.0}, {1.0, 1.0}}));
        CHECK(ranking.order == std::vector<int>{0, 1});
    }
    SECTION("zero-pull arms are dropped") {
        auto ranking = rank_arms(make_solution({{1.0, 1.0}, {0.0, 0.0}}));
        CHECK(ranking.order == std::vector<int>{0});
        CHECK(ranking.dropped == std::vector<int>{1});
    }
    SECTION("ratios are nonincreasing along the order") {
        auto ranking =
            rank_arms(make_solution({{1.0, 2.0}, {3.0, 1.0}, {1.0, 1.0}, {0.5, 4.0}}));
        for (std::size_t i = 1; i < ranking.ratios.size(); ++i)
            CHECK(ranking.ratios[i] <= ranking.ratios[i - 1]);
    }
}

TEST_CASE("local action sampling follows the normalized occupancy") {
    auto arm = deterministic_arm();
    OccupancyTable table(1, 2, 1);
    SECTION("half-half mass pulls about half the time") {
        table.at(0, 0, 0) = 0.5;
        table.at(0, 1, 0) = 0.5;
        Rng rng(4242);
        int pulls = 0;
        const int draws = 20000;
        for (int i = 0; i < draws; ++i)
            if (sample_local_action(*arm, table, 0, 0, rng) == 0) ++pulls;
        CHECK(static_cast<double>(pulls) / draws == Catch::Approx(0.5).margin(0.02));
    }
    SECTION("single-atom mass is deterministic") {
        table.at(0, 0, 0) = 0.3;
        Rng rng(1);
        for (int i = 0; i < 100; ++i) CHECK(sample_local_action(*arm, table, 0, 0, rng) == 0);
    }
    SECTION("zero mass idles") {
        Rng rng(1);
        for (int i = 0; i < 100; ++i)
            CHECK(sample_local_action(*arm, table, 0, 0, rng) == arm->idle_action);
    }
}

TEST_CASE("packing: deterministic always-pull arms under a unit budget") {
    std::vector<ArmHandle> arms = {deterministic_arm(2.0), deterministic_arm(1.0)};
    RelaxedSolution sol = schedule_solution(arms, {2, 2}, 2);
    Rng rng(9);
    PackingRun run = run_packing(arms, sol, 1, 2, rng);
    CHECK(run.total_reward == Catch::Approx(4.0));  // arm 0 pulled twice at reward 2
    REQUIRE(run.pull_log.size() == 2);
    for (const auto& step : run.pull_log) {
        REQUIRE(step.size() == 1);
        CHECK(step[0].arm == 0);
    }
    CHECK(run.discarded.empty());
    CHECK(run.local_time[1] == 0);  // never activated
    CHECK(verify_irrevocability(run));
}

TEST_CASE("packing: blended one-step pair earns 3/4 on average") {
    auto arms = example_pair();
    RelaxedSolution sol = solve_rlp(arms, 1, 1, 1e-6);
    const int trials = 100000;
    double total = 0.0;
    for (int j = 0; j < trials; ++j) {
        Rng rng(derive_seed(2024, static_cast<std::uint64_t>(j)));
        PackingRun run = run_packing(arms, sol, 1, 1, rng);
        CHECK((run.total_reward == 0.0 || run.total_reward == 1.0));
        total += run.total_reward;
    }
    CHECK(total / trials == Catch::Approx(0.75).margin(0.01));
}

TEST_CASE("packing: full budget means no contention and no discards") {
    std::vector<ArmHandle> arms = {deterministic_arm(1.0), deterministic_arm(0.5),
                                   deterministic_arm(0.25)};
    RelaxedSolution sol = schedule_solution(arms, {3, 3, 3}, 3);
    Rng rng(123);
    PackingRun run = run_packing(arms, sol, 3, 3, rng);
    CHECK(run.total_reward == Catch::Approx(3 * (1.0 + 0.5 + 0.25)));
    for (const auto& step : run.pull_log) CHECK(step.size() == 3);
    CHECK(run.discarded.empty());
    CHECK(verify_irrevocability(run));
}

TEST_CASE("packing: discards cascade down the ranking") {
    // Five arms; the top three pull once then idle out, forcing three
    // replacement activations (n - k = 3 exactly).
    std::vector<ArmHandle> arms;
    for (int i = 0; i < 5; ++i) arms.push_back(deterministic_arm(1.0 - 0.1 * i));
    RelaxedSolution sol = schedule_solution(arms, {1, 1, 1, 4, 4}, 4);
    Rng rng(6);
    PackingRun run = run_packing(arms, sol, 2, 4, rng);
    CHECK(run.discarded.size() == 3);
    CHECK(run.activations_beyond_initial == 3);
    CHECK(verify_irrevocability(run));
    // arms 3 and 4 are active at the end
    CHECK(run.active.size() == 2);
}

TEST_CASE("irrevocability oracle rejects a pull after discard") {
    PackingRun run;
    run.budget_k = 1;
    run.local_time.assign(2, 2);
    run.discard_time = {1, -1};
    run.pull_log.resize(3);
    run.pull_log[0].push_back(PullRecord{0, 0, 0, 0, 1.0});
    run.pull_log[2].push_back(PullRecord{0, 0, 0, 0, 1.0});  // pulled after discard at t=1
    CHECK_FALSE(verify_irrevocability(run));
}

TEST_CASE("irrevocability oracle rejects non-contiguous pulls") {
    PackingRun run;
    run.budget_k = 2;
    run.local_time.assign(2, 2);
    run.discard_time = {-1, -1};
    run.pull_log.resize(3);
    run.pull_log[0].push_back(PullRecord{0, 0, 0, 0, 1.0});
    run.pull_log[2].push_back(PullRecord{0, 0, 0, 0, 1.0});  // gap at t=1
    CHECK_FALSE(verify_irrevocability(run));
}

TEST_CASE("irrevocability oracle rejects over-budget steps") {
    PackingRun run;
    run.budget_k = 1;
    run.local_time.assign(2, 1);
    run.discard_time = {-1, -1};
    run.pull_log.resize(1);
    run.pull_log[0].push_back(PullRecord{0, 0, 0, 0, 1.0});
    run.pull_log[0].push_back(PullRecord{1, 0, 0, 0, 1.0});
    CHECK_FALSE(verify_irrevocability(run));
}

TEST_CASE("packing runs satisfy the irrevocability oracle on random instances") {
    Rng rng(2718);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 5);
        const int T = 1 + static_cast<int>(rng.uniform() * 5);
        const int k = 1 + static_cast<int>(rng.uniform() * n) % n;
        auto arms = testsupport::random_coin_instance(rng, n, T, 2);
        RelaxedSolution sol = solve_rlp(arms, k, T, 1e-4);
        for (int j = 0; j < 50; ++j) {
            Rng run_rng(derive_seed(trial * 100 + 7, static_cast<std::uint64_t>(j)));
            PackingRun run = run_packing(arms, sol, k, T, run_rng);
            REQUIRE(verify_irrevocability(run));
            for (const auto& step : run.pull_log)
                REQUIRE(static_cast<int>(step.size()) <= k);
            for (int i = 0; i < n; ++i) REQUIRE(run.local_time[i] <= T);
        }
    }
}

TEST_CASE("thread count resolution honors requests and the environment") {
    CHECK(resolve_threads(3) == 3);
    setenv("BANDITPACK_THREADS", "5", 1);
    CHECK(resolve_threads(0) == 5);
    CHECK(resolve_threads(2) == 2);  // explicit request wins
    setenv("BANDITPACK_THREADS", "bogus", 1);
    CHECK(resolve_threads(0) >= 1);
    unsetenv("BANDITPACK_THREADS");
    CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("simulation summary is reproducible and seed-sensitive") {
    Rng rng(321);
    auto arms = testsupport::random_coin_instance(rng, 4, 4, 2);
    RelaxedSolution sol = solve_rlp(arms, 2, 4, 1e-4);
    auto a = simulate_many(arms, sol, 2, 4, 500, 42, 1);
    auto b = simulate_many(arms, sol, 2, 4, 500, 42, 2);
    CHECK(a.mean_reward == b.mean_reward);  // thread count must not matter
    CHECK(a.std_err == b.std_err);
    auto c = simulate_many(arms, sol, 2, 4, 500, 43, 1);
    CHECK(a.mean_reward != c.mean_reward);
    CHECK(a.irrevocability_violations == 0);
}
