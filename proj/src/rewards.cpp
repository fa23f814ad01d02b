#include "lego/rewards.hpp"

#include "lego/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace lego {

int valid_reward(const ValidationReport& report, const ExecutionResult* exec) {
    if (!report.executable) return -1;
    if (exec && !exec->ok()) return -1;
    return 0;
}

std::vector<EditChain> decompose_chains(const Workflow& w, const Registry& r) {
    std::map<int, std::vector<std::pair<int, std::string>>> producers;
    for (const auto& step : w.steps)
        for (const auto& [slot, ref] : step.inputs) {
            if (ref.kind == ValueRef::Kind::Step)
                producers[step.index].push_back({ref.step, ref.field});
        }

    auto tool_of = [&](int index) -> const ToolSpec* {
        const Step* step = w.find_step(index);
        return step ? r.find(step->model) : nullptr;
    };
    auto is_editing = [&](int index) {
        const ToolSpec* spec = tool_of(index);
        return spec && spec->kind == ToolKind::Editing;
    };
    // A support step is semantically self-contained once it has a prompt of
    // its own (RES, SOS with its fixed target, ADD-PRED, CAP-PRED); its
    // ancestry belongs to it, not to the chain. Prompt-less predictive and
    // auxiliary steps (INVERSE, BBOX, FASTINPAINT) are mere plumbing and the
    // walk continues through them.
    auto walk_through = [&](int index) {
        const ToolSpec* spec = tool_of(index);
        if (!spec) return false;
        if (spec->kind == ToolKind::Auxiliary) return true;
        if (spec->kind != ToolKind::Predictive) return false;
        for (const auto& slot : spec->inputs)
            if (slot.type == SemanticType::Str) return false;
        return true;
    };

    std::vector<EditChain> chains;
    for (const auto& step : w.steps) {
        if (!is_editing(step.index)) continue;
        EditChain chain;
        chain.editor = step.index;
        chain.editor_tool = r.lookup(step.model).canonical_name;

        std::set<int> support;
        std::set<std::string> external;
        // Walk the ancestry, stopping at other editing steps: their outputs
        // are this chain's external inputs, not its support.
        std::vector<int> frontier{step.index};
        std::set<int> visited{step.index};
        while (!frontier.empty()) {
            const int node = frontier.back();
            frontier.pop_back();
            const Step* current = w.find_step(node);
            if (!current) continue;
            for (const auto& [slot, ref] : current->inputs)
                if (ref.kind == ValueRef::Kind::Init)
                    external.insert(serialize_value_ref(ref));
            for (const auto& [producer, field] : producers[node]) {
                if (is_editing(producer)) {
                    external.insert("step" + std::to_string(producer) + "[" +
                                    field + "]");
                    continue;
                }
                support.insert(producer);
                if (walk_through(producer) && visited.insert(producer).second)
                    frontier.push_back(producer);
            }
        }
        chain.support.assign(support.begin(), support.end());
        chain.inputs_from.assign(external.begin(), external.end());
        chains.push_back(std::move(chain));
    }
    return chains;
}

double effect_reward(int n_add, int n_remove) {
    return 1.0 - 0.5 * static_cast<double>(n_add + n_remove);
}

RewardBreakdown stage_reward(int stage, int r_valid,
                             std::optional<double> r_sim,
                             std::optional<double> r_effect) {
    RewardBreakdown out;
    out.r_valid = r_valid;
    if (stage == 2) {
        if (!r_sim) fail("MissingComponent", "stage 2 needs a similarity reward");
        out.r_sim = r_sim;
        out.total = r_valid + *r_sim;
    } else if (stage == 3) {
        if (!r_effect) fail("MissingComponent", "stage 3 needs an effect reward");
        out.r_effect = r_effect;
        out.total = r_valid + *r_effect;
    } else {
        fail("MissingComponent", "stage must be 2 or 3");
    }
    return out;
}

std::vector<double> group_advantages(const std::vector<double>& rewards) {
    const std::size_t n = rewards.size();
    if (n < 2) fail("GroupTooSmall", "advantage normalization needs G >= 2");
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(n);
    const double std_dev = std::sqrt(var);
    std::vector<double> advantages(n, 0.0);
    if (std_dev < 1e-8) return advantages;
    for (std::size_t i = 0; i < n; ++i)
        advantages[i] = (rewards[i] - mean) / std_dev;
    return advantages;
}

double grpo_objective(const GroupBatch& batch) {
    const std::size_t n = batch.advantages.size();
    if (batch.logp_new.size() != n || batch.logp_old.size() != n ||
        batch.logp_ref.size() != n)
        fail("NonFiniteInput", "batch vectors must share one length");
    auto check = [](double v) {
        if (!std::isfinite(v)) fail("NonFiniteInput", "non-finite batch value");
    };

    double surrogate = 0.0;
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        check(batch.advantages[i]);
        check(batch.logp_new[i]);
        check(batch.logp_old[i]);
        check(batch.logp_ref[i]);
        const double ratio = std::exp(batch.logp_new[i] - batch.logp_old[i]);
        const double clipped = std::clamp(ratio, 1.0 - batch.epsilon,
                                          1.0 + batch.epsilon);
        surrogate += std::min(ratio * batch.advantages[i],
                              clipped * batch.advantages[i]);
        const double d = batch.logp_ref[i] - batch.logp_new[i];
        kl += std::exp(d) - d - 1.0;
    }
    if (n == 0) return 0.0;
    const double g = static_cast<double>(n);
    return surrogate / g - batch.beta * (kl / g);
}

double sft_nll(const std::vector<double>& token_logprobs) {
    double sum = 0.0;
    for (double lp : token_logprobs) {
        if (!std::isfinite(lp)) fail("NonFiniteInput", "non-finite log-prob");
        sum += lp;
    }
    return -sum;
}

} // namespace lego
