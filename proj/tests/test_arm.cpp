#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "banditpack/arm.hpp"
#include "banditpack/rng.hpp"
#include "test_support.hpp"

using namespace banditpack;

TEST_CASE("smallest legal arm builds and is canonical") {
    std::vector<double> reward = {1.0, 0.0};
    std::vector<double> kernel = {1.0, 1.0};
    TabularBuildReport report;
    ArmModel arm = build_tabular_arm(1, 2, 1, reward, kernel, 0, &report);
    CHECK(arm.num_states == 1);
    CHECK(arm.reward_at(0, 0) == 1.0);
    CHECK(arm.reward_at(0, 1) == 0.0);
    REQUIRE(arm.kernel_row(0, 1).size() == 1);
    CHECK(arm.kernel_row(0, 1)[0].next == 0);
    CHECK(arm.kernel_row(0, 1)[0].prob == 1.0);
    CHECK_FALSE(report.idle_rows_canonicalized);
}

TEST_CASE("kernel row summing to 0.9 is rejected") {
    std::vector<double> reward = {1.0, 0.0};
    std::vector<double> kernel = {0.9, 1.0};
    CHECK_THROWS_AS(build_tabular_arm(1, 2, 1, reward, kernel, 0), NonStochasticRow);
}

TEST_CASE("negative reward is rejected") {
    std::vector<double> reward = {-0.5, 0.0};
    std::vector<double> kernel = {1.0, 1.0};
    CHECK_THROWS_AS(build_tabular_arm(1, 2, 1, reward, kernel, 0), NegativeReward);
}

TEST_CASE("non-canonical idle rows are overwritten and flagged") {
    // two states; idle row of state 0 leaks to state 1 and pays reward
    std::vector<double> reward = {1.0, 0.3, 0.5, 0.0};
    std::vector<double> kernel = {
        0.5, 0.5,  // s0 pull
        0.0, 1.0,  // s0 idle (non-canonical)
        1.0, 0.0,  // s1 pull
        0.0, 1.0,  // s1 idle (canonical)
    };
    TabularBuildReport report;
    ArmModel arm = build_tabular_arm(2, 2, 1, reward, kernel, 0, &report);
    CHECK(report.idle_rows_canonicalized);
    for (int s = 0; s < 2; ++s) {
        CHECK(arm.reward_at(s, 1) == 0.0);
        REQUIRE(arm.kernel_row(s, 1).size() == 1);
        CHECK(arm.kernel_row(s, 1)[0].next == s);
        CHECK(arm.kernel_row(s, 1)[0].prob == 1.0);
    }
}

TEST_CASE("two-action deterministic arm matches the textbook construction") {
    auto arm = testsupport::deterministic_arm();
    CHECK(arm->num_actions == 2);
    CHECK(arm->idle_action == 1);
    CHECK(arm->reward_at(0, 0) == 1.0);
    CHECK(arm->max_reward() == 1.0);
}

TEST_CASE("coin predictive: hand-checked values") {
    CHECK(coin_predictive(1.0, 1.0, 1, 1) == Catch::Approx(0.5).margin(1e-14));
    for (int j = 0; j <= 2; ++j)
        CHECK(coin_predictive(1.0, 1.0, 2, j) == Catch::Approx(1.0 / 3.0).margin(1e-13));
    CHECK(coin_predictive(2.0, 1.0, 1, 1) == Catch::Approx(2.0 / 3.0).margin(1e-13));
    CHECK_THROWS_AS(coin_predictive(0.0, 1.0, 1, 0), DomainError);
    CHECK_THROWS_AS(coin_predictive(1.0, -2.0, 1, 0), DomainError);
}

TEST_CASE("coin predictive rows sum to one") {
    Rng rng(20240817);
    for (int trial = 0; trial < 50; ++trial) {
        const double alpha = rng.uniform(0.05, 40.0);
        const double beta = rng.uniform(0.05, 40.0);
        const int m = 1 + static_cast<int>(rng.uniform() * 5);
        double sum = 0.0;
        for (int j = 0; j <= m; ++j) sum += coin_predictive(alpha, beta, m, j);
        CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("coin lattice: state count and root reward") {
    ArmModel coin = build_coin_arm(CoinSpec{1, 1.0, 1.0, 1.0, 2});
    CHECK(coin.num_states == 6);
    CHECK(coin.initial_state == 0);
    CHECK(coin.reward_at(0, kCoinPullAction) == Catch::Approx(0.5).margin(1e-14));

    ArmModel wide = build_coin_arm(CoinSpec{2, 1.0, 1.0, 1.0, 1});
    CHECK(wide.num_states == 4);
    CHECK(wide.reward_at(0, kCoinPullAction) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("coin lattice size follows the layer formula") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const int m = 1 + static_cast<int>(rng.uniform() * 3);
        const int T = 1 + static_cast<int>(rng.uniform() * 6);
        CoinSpec spec{m, rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), 1.0, T};
        ArmModel coin = build_coin_arm(spec);
        CHECK(coin.num_states == (T + 1) + m * T * (T + 1) / 2);
    }
}

TEST_CASE("coin pull rewards are a martingale along pull transitions") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto coin = testsupport::random_coin(rng, 1 + static_cast<int>(rng.uniform() * 6));
        double worst = 0.0;
        for (int s = 0; s < coin->num_states; ++s) {
            double expected_next = 0.0;
            for (const auto& tr : coin->kernel_row(s, kCoinPullAction))
                expected_next += tr.prob * coin->reward_at(tr.next, kCoinPullAction);
            worst = std::max(worst, std::abs(coin->reward_at(s, kCoinPullAction) - expected_next));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("idle semantics hold on every arm") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        ArmHandle arm = (trial % 2 == 0) ? testsupport::random_coin(rng, 3)
                                         : testsupport::random_tabular_arm(rng);
        for (int s = 0; s < arm->num_states; ++s) {
            CHECK(arm->reward_at(s, arm->idle_action) == 0.0);
            REQUIRE(arm->kernel_row(s, arm->idle_action).size() == 1);
            CHECK(arm->kernel_row(s, arm->idle_action)[0].next == s);
            CHECK(arm->kernel_row(s, arm->idle_action)[0].prob == 1.0);
        }
    }
}

TEST_CASE("coin spec validation") {
    CHECK_THROWS_AS(build_coin_arm(CoinSpec{0, 1.0, 1.0, 1.0, 2}), DomainError);
    CHECK_THROWS_AS(build_coin_arm(CoinSpec{1, 0.0, 1.0, 1.0, 2}), DomainError);
    CHECK_THROWS_AS(build_coin_arm(CoinSpec{1, 1.0, -1.0, 1.0, 2}), DomainError);
    CHECK_THROWS_AS(build_coin_arm(CoinSpec{1, 1.0, 1.0, -0.1, 2}), DomainError);
    CHECK_THROWS_AS(build_coin_arm(CoinSpec{1, 1.0, 1.0, 1.0, 0}), DomainError);
}
