#pragma once

#include "lego/executor.hpp"
#include "lego/registry.hpp"
#include "lego/validator.hpp"
#include "lego/workflow.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lego {

// One editing chain: a single editing step plus the predictive/auxiliary
// ancestry it relies on. References crossing the chain boundary (init slots
// and other chains' editors) are listed as serialized refs.
struct EditChain {
    int editor = 0;
    std::string editor_tool;           // canonical name
    std::vector<int> support;          // ascending step indices
    std::vector<std::string> inputs_from;  // sorted, deduplicated

    bool operator==(const EditChain&) const = default;
};

struct RewardBreakdown {
    int r_valid = 0;  // 0 or -1
    std::optional<double> r_sim;
    std::optional<double> r_effect;
    double total = 0.0;
};

// 0 when the workflow is statically executable and (if an execution result is
// supplied) actually ran to Ok; -1 otherwise.
int valid_reward(const ValidationReport& report,
                 const ExecutionResult* exec = nullptr);

// One chain per editing step; support stops at (and excludes) other editing
// steps, whose outputs show up in inputs_from instead. Shared ancestors are
// duplicated into every dependent chain.
std::vector<EditChain> decompose_chains(const Workflow& w, const Registry& r);

// 1 - 0.5 * (additions + removals) demanded by the critic. Unbounded below.
double effect_reward(int n_add, int n_remove);

// stage 2 totals r_valid + r_sim; stage 3 totals r_valid + r_effect. The
// stage-appropriate part must be present: Error("MissingComponent").
RewardBreakdown stage_reward(int stage, int r_valid,
                             std::optional<double> r_sim,
                             std::optional<double> r_effect);

// Group-normalized advantages: (r - mean) / population std; all zeros when
// the group is (numerically) constant. Error("GroupTooSmall") for G < 2.
std::vector<double> group_advantages(const std::vector<double>& rewards);

struct GroupBatch {
    std::vector<double> advantages;
    std::vector<double> logp_new;
    std::vector<double> logp_old;
    std::vector<double> logp_ref;
    double epsilon = 0.2;
    double beta = 0.04;
};

// Clipped-surrogate objective with a nonnegative per-sample KL estimator:
//   (1/G) sum min(ratio*A, clip(ratio, 1-eps, 1+eps)*A) - beta * KL_hat
//   KL_hat = (1/G) sum exp(d) - d - 1,  d = logp_ref - logp_new.
// Error("NonFiniteInput") on non-finite log-probabilities or advantages.
double grpo_objective(const GroupBatch& batch);

// Negative log-likelihood: the negated sum of the given token log-probs.
double sft_nll(const std::vector<double>& token_logprobs);

} // namespace lego
