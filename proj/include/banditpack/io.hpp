#pragma once

// File formats.
//
// Instance (JSON): {"horizon": int, "budget_k": int, "arms": [...]} where an
// arm is {"type":"coin","m":int,"alpha":f,"beta":f,"reward_scale":f} or
// {"type":"tabular","states":int,"actions":int,"idle":int,"initial":int,
//  "reward":[[...]],"kernel":[[[...]]]}. Generated instances also carry an
// optional "meta" object with the generator seed; readers ignore it.
//
// Solution (JSON): {"lambda_feas","lambda_infeas","alpha","dual_value",
// "epsilon","arms":[{"expected_reward","expected_pulls",
// "occupancy":[[[f]]]}]} with the occupancy tensor indexed [t][state][action].
//
// Simulation summary (JSON): {"trajectories","mean_reward","std_err",
// "discards_mean"}. Trajectory log (CSV): t,arm,action,state_before,
// state_after,reward. Bench CSV: cv,n,k,T,instance_seed,mean_reward,
// std_err,dual_bound,ratio.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "banditpack/bench.hpp"
#include "banditpack/errors.hpp"
#include "banditpack/instance.hpp"
#include "banditpack/occupancy.hpp"
#include "banditpack/packing.hpp"
#include "banditpack/relaxation.hpp"

namespace banditpack {

using ordered_json = nlohmann::ordered_json;

inline ordered_json instance_to_json(const BanditInstance& instance) {
    ordered_json doc;
    doc["horizon"] = instance.horizon;
    doc["budget_k"] = instance.budget_k;
    doc["arms"] = ordered_json::array();
    for (const auto& entry : instance.arms) {
        ordered_json arm;
        if (entry.coin) {
            arm["type"] = "coin";
            arm["m"] = entry.coin->m;
            arm["alpha"] = entry.coin->alpha0;
            arm["beta"] = entry.coin->beta0;
            arm["reward_scale"] = entry.coin->reward_scale;
        } else {
            const ArmModel& model = *entry.model;
            arm["type"] = "tabular";
            arm["states"] = model.num_states;
            arm["actions"] = model.num_actions;
            arm["idle"] = model.idle_action;
            arm["initial"] = model.initial_state;
            ordered_json reward = ordered_json::array();
            ordered_json kernel = ordered_json::array();
            for (int s = 0; s < model.num_states; ++s) {
                ordered_json rrow = ordered_json::array();
                ordered_json krow = ordered_json::array();
                for (int a = 0; a < model.num_actions; ++a) {
                    rrow.push_back(model.reward_at(s, a));
                    std::vector<double> dense(static_cast<std::size_t>(model.num_states), 0.0);
                    for (const auto& tr : model.kernel_row(s, a))
                        dense[static_cast<std::size_t>(tr.next)] = tr.prob;
                    krow.push_back(dense);
                }
                reward.push_back(std::move(rrow));
                kernel.push_back(std::move(krow));
            }
            arm["reward"] = std::move(reward);
            arm["kernel"] = std::move(kernel);
        }
        doc["arms"].push_back(std::move(arm));
    }
    if (instance.meta) {
        doc["meta"] = {{"seed", instance.meta->seed},
                       {"cv", instance.meta->cv},
                       {"groups", instance.meta->groups},
                       {"m", instance.meta->m}};
    }
    return doc;
}

inline BanditInstance instance_from_json(const ordered_json& doc) {
    BanditInstance instance;
    instance.horizon = doc.at("horizon").get<int>();
    instance.budget_k = doc.at("budget_k").get<int>();
    if (instance.horizon < 1) throw DomainError("instance: horizon must be >= 1");
    for (const auto& arm : doc.at("arms")) {
        const std::string type = arm.at("type").get<std::string>();
        if (type == "coin") {
            CoinSpec spec;
            spec.m = arm.at("m").get<int>();
            spec.alpha0 = arm.at("alpha").get<double>();
            spec.beta0 = arm.at("beta").get<double>();
            spec.reward_scale = arm.at("reward_scale").get<double>();
            spec.horizon = instance.horizon;
            auto model = std::make_shared<const ArmModel>(build_coin_arm(spec));
            instance.arms.push_back(InstanceArm{std::move(model), spec});
        } else if (type == "tabular") {
            const int S = arm.at("states").get<int>();
            const int A = arm.at("actions").get<int>();
            if (S < 1 || A < 1) throw DomainError("instance: bad tabular arm shape");
            std::vector<double> reward;
            std::vector<double> kernel;
            reward.reserve(static_cast<std::size_t>(S) * A);
            kernel.reserve(static_cast<std::size_t>(S) * A * S);
            for (const auto& row : arm.at("reward"))
                for (const auto& v : row) reward.push_back(v.get<double>());
            for (const auto& srow : arm.at("kernel"))
                for (const auto& arow : srow)
                    for (const auto& v : arow) kernel.push_back(v.get<double>());
            auto model = std::make_shared<const ArmModel>(
                build_tabular_arm(S, A, arm.at("idle").get<int>(), reward, kernel,
                                  arm.at("initial").get<int>()));
            instance.arms.push_back(InstanceArm{std::move(model), std::nullopt});
        } else {
            throw DomainError("instance: unknown arm type '" + type + "'");
        }
    }
    if (doc.contains("meta")) {
        InstanceMeta meta;
        const auto& m = doc.at("meta");
        meta.seed = m.value("seed", std::uint64_t{0});
        meta.cv = m.value("cv", 0.0);
        meta.groups = m.value("groups", 0);
        meta.m = m.value("m", 0);
        instance.meta = meta;
    }
    return instance;
}

inline ordered_json solution_to_json(const RelaxedSolution& solution) {
    ordered_json doc;
    doc["lambda_feas"] = solution.lambda_feas;
    doc["lambda_infeas"] = solution.lambda_infeas;
    doc["alpha"] = solution.alpha_blend;
    doc["dual_value"] = solution.dual_value;
    doc["epsilon"] = solution.epsilon;
    doc["arms"] = ordered_json::array();
    for (const auto& table : solution.tables) {
        ordered_json arm;
        arm["expected_reward"] = table.expected_reward;
        arm["expected_pulls"] = table.expected_pulls;
        ordered_json tensor = ordered_json::array();
        for (int t = 0; t < table.horizon; ++t) {
            ordered_json slice = ordered_json::array();
            for (int s = 0; s < table.num_states; ++s) {
                ordered_json row = ordered_json::array();
                for (int a = 0; a < table.num_actions; ++a) row.push_back(table.at(s, a, t));
                slice.push_back(std::move(row));
            }
            tensor.push_back(std::move(slice));
        }
        arm["occupancy"] = std::move(tensor);
        doc["arms"].push_back(std::move(arm));
    }
    return doc;
}

inline RelaxedSolution solution_from_json(const ordered_json& doc) {
    RelaxedSolution solution;
    solution.lambda_feas = doc.at("lambda_feas").get<double>();
    solution.lambda_infeas = doc.at("lambda_infeas").get<double>();
    solution.alpha_blend = doc.at("alpha").get<double>();
    solution.dual_value = doc.at("dual_value").get<double>();
    solution.epsilon = doc.at("epsilon").get<double>();
    for (const auto& arm : doc.at("arms")) {
        const auto& tensor = arm.at("occupancy");
        const int T = static_cast<int>(tensor.size());
        if (T < 1) throw DomainError("solution: empty occupancy tensor");
        const int S = static_cast<int>(tensor.at(0).size());
        const int A = static_cast<int>(tensor.at(0).at(0).size());
        OccupancyTable table(S, A, T);
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a)
                    table.at(s, a, t) = tensor.at(t).at(s).at(a).get<double>();
        table.expected_reward = arm.at("expected_reward").get<double>();
        table.expected_pulls = arm.at("expected_pulls").get<double>();
        solution.tables.push_back(std::move(table));
    }
    return solution;
}

inline ordered_json summary_to_json(const SimulationSummary& summary) {
    ordered_json doc;
    doc["trajectories"] = summary.trajectories;
    doc["mean_reward"] = summary.mean_reward;
    doc["std_err"] = summary.std_err;
    doc["discards_mean"] = summary.discards_mean;
    return doc;
}

inline void write_trajectory_csv(std::ostream& os, const PackingRun& run) {
    os << "t,arm,action,state_before,state_after,reward\n";
    os << std::setprecision(12);
    for (std::size_t t = 0; t < run.pull_log.size(); ++t)
        for (const auto& rec : run.pull_log[t])
            os << t << ',' << rec.arm << ',' << rec.action << ',' << rec.state_before << ','
               << rec.state_after << ',' << rec.reward << '\n';
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchReport>& reports,
                            bool header = true) {
    if (header) os << "cv,n,k,T,instance_seed,mean_reward,std_err,dual_bound,ratio\n";
    os << std::setprecision(12);
    for (const auto& report : reports)
        for (const auto& row : report.per_instance)
            os << report.config.cv << ',' << report.config.n << ',' << report.config.k << ','
               << report.config.horizon << ',' << row.instance_seed << ',' << row.packing_mean
               << ',' << row.std_err << ',' << row.dual_bound << ',' << row.ratio << '\n';
}

inline ordered_json bench_aggregate_json(const std::vector<BenchReport>& reports) {
    ordered_json doc;
    doc["rows"] = ordered_json::array();
    for (const auto& report : reports) {
        doc["rows"].push_back({{"cv", report.config.cv},
                               {"n", report.config.n},
                               {"k", report.config.k},
                               {"T", report.config.horizon},
                               {"instances", static_cast<int>(report.per_instance.size())},
                               {"trajectories", report.config.trajectories},
                               {"aggregate_ratio", report.aggregate_ratio},
                               {"confidence_half_width", report.confidence_half_width}});
    }
    return doc;
}

inline ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open file: " + path);
    ordered_json doc;
    in >> doc;
    return doc;
}

inline void save_json_file(const std::string& path, const ordered_json& doc, int indent = 2) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write file: " + path);
    if (indent >= 0)
        out << doc.dump(indent) << '\n';
    else
        out << doc.dump() << '\n';
}

}  // namespace banditpack
