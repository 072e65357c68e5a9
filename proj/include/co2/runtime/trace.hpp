#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "co2/runtime/steps.hpp"
#include "co2/runtime/system.hpp"

namespace co2::runtime {

struct TraceRecord {
    int step = 0;  // 1-based
    std::string rule;
    std::vector<Ident> agents;
    std::optional<Ident> session;
    std::string label;
    std::string state;  // successor, canonical form
};

struct RunResult {
    std::string initial;
    std::vector<TraceRecord> records;
    bool stuck = false;      // ended with no step available
    bool truncated = false;  // hit the step limit
};

// Chooser: index of the step to take, or nullopt to stop the run.
template <ContractModel M>
using Chooser = std::function<std::optional<std::size_t>(
    const SystemState<M>&, const std::vector<StepInfo<M>>&)>;

template <ContractModel M>
Chooser<M> first_chooser() {
    return [](const SystemState<M>&, const std::vector<StepInfo<M>>&) {
        return std::optional<std::size_t>{0};
    };
}

template <ContractModel M>
Chooser<M> random_chooser(unsigned seed) {
    auto rng = std::make_shared<std::mt19937>(seed);
    return [rng](const SystemState<M>&, const std::vector<StepInfo<M>>& steps) {
        std::uniform_int_distribution<std::size_t> pick(0, steps.size() - 1);
        return std::optional<std::size_t>{pick(*rng)};
    };
}

template <ContractModel M>
RunResult run_trace(const SystemState<M>& initial, const Env<M>& env,
                    int max_steps, const Chooser<M>& choose) {
    RunResult res;
    SystemState<M> cur = freeze_names<M>(renormalise<M>(initial));
    res.initial = to_string<M>(cur, env);
    for (int n = 1;; ++n) {
        if (n > max_steps) {
            res.truncated = true;
            return res;
        }
        auto steps = enumerate_steps<M>(cur, env);
        if (steps.empty()) {
            res.stuck = true;
            return res;
        }
        auto idx = choose(cur, steps);
        if (!idx) return res;
        const StepInfo<M>& step = steps[*idx];
        cur = step.next;
        res.records.push_back(TraceRecord{n, step.rule, step.agents,
                                          step.session, step.label,
                                          to_string<M>(cur, env)});
    }
}

}  // namespace co2::runtime
