#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "banditpack/arm.hpp"

namespace banditpack {

// One arm of an instance. Arms built from a coin spec keep it so they can be
// serialized compactly (and identical arms within a group can share one
// model).
struct InstanceArm {
    ArmHandle model;
    std::optional<CoinSpec> coin;
};

struct InstanceMeta {
    std::uint64_t seed = 0;
    double cv = 0.0;
    int groups = 0;
    int m = 0;
};

struct BanditInstance {
    int horizon = 1;
    int budget_k = 1;
    std::vector<InstanceArm> arms;
    std::optional<InstanceMeta> meta;

    std::vector<ArmHandle> models() const {
        std::vector<ArmHandle> out;
        out.reserve(arms.size());
        for (const auto& a : arms) out.push_back(a.model);
        return out;
    }
};

}  // namespace banditpack
