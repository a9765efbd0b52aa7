// banditpack command line: generate benchmark instances, solve the budget
// relaxation, simulate the irrevocable packing policy, compute exact optima
// for tiny instances, and run benchmark sweeps.
//
// Exit codes: 0 success, 2 usage/input error, 3 infeasible generation
// target, 4 solver error, 5 exact-solve cap exceeded.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "banditpack/bench.hpp"
#include "banditpack/io.hpp"
#include "banditpack/oracle.hpp"
#include "banditpack/packing.hpp"
#include "banditpack/parallel.hpp"
#include "banditpack/relaxation.hpp"

namespace {

using namespace banditpack;

struct GenerateArgs {
    GenerativeConfig config;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_generate(const GenerateArgs& args) {
    BanditInstance instance = generate_instance(args.config, args.seed);
    save_json_file(args.out, instance_to_json(instance));
    std::cout << "generated n=" << args.config.n << " coin arms in " << args.config.groups
              << " groups, horizon=" << args.config.horizon << ", k=" << args.config.k
              << ", cv=" << args.config.cv << ", seed=" << args.seed << " -> " << args.out
              << "\n";
    return 0;
}

int cmd_solve(const std::string& instance_path, double epsilon, const std::string& out,
              int threads) {
    BanditInstance instance = instance_from_json(load_json_file(instance_path));
    const auto t0 = std::chrono::steady_clock::now();
    RelaxedSolution solution =
        solve_rlp(instance.models(), instance.budget_k, instance.horizon, epsilon, threads);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_json_file(out, solution_to_json(solution), /*indent=*/-1);
    std::cout << "solved n=" << instance.arms.size() << " value=" << solution.total_expected_reward()
              << " pulls=" << solution.total_expected_pulls() << " dual=" << solution.dual_value
              << " alpha=" << solution.alpha_blend << " iters=" << solution.bisection_iterations
              << " (" << seconds << " s) -> " << out << "\n";
    return 0;
}

struct SimulateArgs {
    std::string instance_path;
    std::string solution_path;
    int trajectories = 1000;
    std::uint64_t seed = 0;
    std::string log_path;
    std::string out;
    int threads = 0;
};

int cmd_simulate(const SimulateArgs& args) {
    BanditInstance instance = instance_from_json(load_json_file(args.instance_path));
    RelaxedSolution solution = solution_from_json(load_json_file(args.solution_path));
    if (solution.tables.size() != instance.arms.size())
        throw DomainError("simulate: solution arm count does not match instance");
    const auto models = instance.models();
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& t = solution.tables[i];
        if (t.num_states != models[i]->num_states || t.num_actions != models[i]->num_actions ||
            t.horizon != instance.horizon)
            throw DomainError("simulate: occupancy shape mismatch at arm " + std::to_string(i));
    }
    SimulationSummary summary = simulate_many(models, solution, instance.budget_k,
                                              instance.horizon, args.trajectories, args.seed,
                                              args.threads);
    if (!args.log_path.empty()) {
        // Log replays trajectory stream 0.
        Rng rng(derive_seed(args.seed, 0));
        PackingRun run = run_packing(models, solution, instance.budget_k, instance.horizon, rng);
        std::ofstream log(args.log_path);
        if (!log) throw DomainError("cannot write file: " + args.log_path);
        write_trajectory_csv(log, run);
    }
    const auto doc = summary_to_json(summary);
    if (!args.out.empty()) save_json_file(args.out, doc);
    std::cout << doc.dump() << "\n";
    return 0;
}

int cmd_oracle(const std::string& instance_path, const std::string& out) {
    BanditInstance instance = instance_from_json(load_json_file(instance_path));
    const double j_star =
        exact_optimal_value(instance.models(), instance.budget_k, instance.horizon);
    ordered_json doc;
    doc["j_star"] = j_star;
    if (!out.empty()) save_json_file(out, doc);
    std::cout << doc.dump() << "\n";
    return 0;
}

struct BenchArgs {
    std::string preset;
    GenerativeConfig config;
    double epsilon = 1e-3;
    std::uint64_t seed = 0;
    std::string csv_path;
    std::string json_path;
    int threads = 0;
    bool explicit_config = false;
};

int cmd_bench(const BenchArgs& args) {
    std::vector<GenerativeConfig> rows;
    if (args.preset == "table1-small") {
        for (double cv : {1.0, 2.5}) {
            GenerativeConfig c;
            c.n = 100;
            c.k = 10;
            c.horizon = 25;
            c.cv = cv;
            c.instances = 10;
            c.trajectories = 1000;
            rows.push_back(c);
        }
    } else if (!args.preset.empty()) {
        throw CLI::ValidationError("--preset", "unknown preset '" + args.preset + "'");
    } else {
        rows.push_back(args.config);
    }
    std::vector<BenchReport> reports;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].base_seed = derive_seed(args.seed, i);
        reports.push_back(run_bench(rows[i], args.epsilon, args.threads));
        const auto& r = reports.back();
        std::cout << "cv=" << rows[i].cv << " n=" << rows[i].n << " k=" << rows[i].k
                  << " T=" << rows[i].horizon << " aggregate_ratio=" << r.aggregate_ratio
                  << " +/-" << r.confidence_half_width << " (98%)\n";
    }
    if (!args.csv_path.empty()) {
        std::ofstream csv(args.csv_path);
        if (!csv) throw DomainError("cannot write file: " + args.csv_path);
        write_bench_csv(csv, reports);
    }
    if (!args.json_path.empty()) save_json_file(args.json_path, bench_aggregate_json(reports));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"budgeted multi-armed bandits: budget relaxation solver and irrevocable "
                 "packing policy"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads,
                   "worker threads (0 = BANDITPACK_THREADS env or hardware)")
        ->capture_default_str();

    GenerateArgs gen;
    std::vector<double> alpha_range{0.05, 0.35};
    std::vector<double> reward_range{0.0, 2.0};
    auto* generate = app.add_subcommand("generate", "write a random coin-bandit instance");
    generate->add_option("--n", gen.config.n, "number of arms")->required();
    generate->add_option("--k", gen.config.k, "simultaneous pull budget")->required();
    generate->add_option("--T,--horizon", gen.config.horizon, "time horizon")->required();
    generate->add_option("--cv", gen.config.cv, "target prior coefficient of variation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    generate->add_option("--groups", gen.config.groups, "statistically identical arm groups")
        ->capture_default_str();
    generate->add_option("--m", gen.config.m, "Binomial trials per pull")->capture_default_str();
    generate->add_option("--alpha-range", alpha_range, "prior alpha draw interval")
        ->expected(2);
    generate->add_option("--reward-range", reward_range, "per-success reward draw interval")
        ->expected(2);
    generate->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
    generate->add_option("--out", gen.out, "output instance file")->required();

    std::string solve_instance;
    double solve_epsilon = 1e-6;
    std::string solve_out;
    auto* solve = app.add_subcommand("solve", "solve the budget relaxation of an instance");
    solve->add_option("--instance", solve_instance, "instance file")
        ->required()
        ->check(CLI::ExistingFile);
    solve->add_option("--epsilon", solve_epsilon, "certificate tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve->add_option("--out", solve_out, "output solution file")->required();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo the packing policy");
    simulate->add_option("--instance", sim.instance_path, "instance file")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--solution", sim.solution_path, "solution file")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--trajectories", sim.trajectories, "number of trajectories")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate->add_option("--seed", sim.seed, "simulation seed")->capture_default_str();
    simulate->add_option("--log", sim.log_path, "per-step CSV of trajectory 0");
    simulate->add_option("--out", sim.out, "also write the summary JSON here");

    std::string oracle_instance;
    std::string oracle_out;
    auto* oracle = app.add_subcommand("oracle", "exact optimal value of a tiny instance");
    oracle->add_option("--instance", oracle_instance, "instance file")
        ->required()
        ->check(CLI::ExistingFile);
    oracle->add_option("--out", oracle_out, "also write the result JSON here");

    BenchArgs bench;
    std::vector<double> bench_alpha{0.05, 0.35};
    std::vector<double> bench_reward{0.0, 2.0};
    auto* benchcmd = app.add_subcommand("bench", "benchmark sweep: generate, solve, simulate");
    benchcmd->add_option("--preset", bench.preset, "named sweep (table1-small)");
    benchcmd->add_option("--n", bench.config.n, "arms")->capture_default_str();
    benchcmd->add_option("--k", bench.config.k, "pull budget")->capture_default_str();
    benchcmd->add_option("--T,--horizon", bench.config.horizon, "horizon")
        ->capture_default_str();
    benchcmd->add_option("--cv", bench.config.cv, "prior coefficient of variation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    benchcmd->add_option("--groups", bench.config.groups, "arm groups")->capture_default_str();
    benchcmd->add_option("--m", bench.config.m, "Binomial trials per pull")
        ->capture_default_str();
    benchcmd->add_option("--alpha-range", bench_alpha, "prior alpha draw interval")->expected(2);
    benchcmd->add_option("--reward-range", bench_reward, "reward draw interval")->expected(2);
    benchcmd->add_option("--instances", bench.config.instances, "instances per row")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    benchcmd->add_option("--trajectories", bench.config.trajectories, "trajectories per instance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    benchcmd->add_option("--epsilon", bench.epsilon, "solver tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    benchcmd->add_option("--seed", bench.seed, "base seed")->capture_default_str();
    benchcmd->add_option("--csv", bench.csv_path, "per-instance CSV output");
    benchcmd->add_option("--json", bench.json_path, "aggregate JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const int resolved = banditpack::resolve_threads(threads);
        if (generate->parsed()) {
            gen.config.alpha_min = alpha_range[0];
            gen.config.alpha_max = alpha_range[1];
            gen.config.reward_min = reward_range[0];
            gen.config.reward_max = reward_range[1];
            return cmd_generate(gen);
        }
        if (solve->parsed()) return cmd_solve(solve_instance, solve_epsilon, solve_out, resolved);
        if (simulate->parsed()) {
            sim.threads = resolved;
            return cmd_simulate(sim);
        }
        if (oracle->parsed()) return cmd_oracle(oracle_instance, oracle_out);
        if (benchcmd->parsed()) {
            bench.config.alpha_min = bench_alpha[0];
            bench.config.alpha_max = bench_alpha[1];
            bench.config.reward_min = bench_reward[0];
            bench.config.reward_max = bench_reward[1];
            bench.threads = resolved;
            return cmd_bench(bench);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const banditpack::InfeasibleCV& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const banditpack::InstanceTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const banditpack::InvalidBudget& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const banditpack::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const banditpack::NonStochasticRow& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const banditpack::NegativeReward& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed input file: " << e.what() << "\n";
        return 2;
    } catch (const banditpack::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
