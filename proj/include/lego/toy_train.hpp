#pragma once

#include "lego/registry.hpp"
#include "lego/rewards.hpp"
#include "lego/workflow.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lego {

struct ToyTask {
    std::string id;
    std::string instruction;
    Workflow gt;
    std::vector<Workflow> candidates;
};

// Fixture format: JSON array of {id, instruction, gt, candidates[]}, with
// workflows in the wire format. Throws Error("SyntaxError"/"NoCandidates").
std::vector<ToyTask> load_toy_tasks(const std::string& json_document);

struct ToyTrainConfig {
    int group_size = 8;
    int iterations = 300;
    double step_size = 0.1;
    double epsilon = 0.2;
    double beta = 0.04;
    std::uint64_t seed = 0;
};

struct ToyIterationStats {
    int iteration = 0;
    double mean_reward = 0.0;
    double objective = 0.0;
};

struct ToyTrainResult {
    std::vector<ToyIterationStats> curve;
    // Final softmax probabilities per task, aligned with the candidate lists.
    std::vector<std::vector<double>> final_probs;
    // Candidate rewards per task (validity + similarity against gt).
    std::vector<std::vector<double>> candidate_rewards;
};

// Analytic gradient of the clipped-surrogate objective with respect to
// tabular logits, where sample j's new log-probability is
// log softmax(logits)[samples[j]]. Matches central finite differences of
// grpo_objective on the same construction.
std::vector<double> grpo_logit_gradient(const std::vector<double>& logits,
                                        const std::vector<int>& samples,
                                        const std::vector<double>& advantages,
                                        const std::vector<double>& logp_old,
                                        const std::vector<double>& logp_ref,
                                        double epsilon, double beta);

std::vector<double> softmax(const std::vector<double>& logits);

// Tabular policy-gradient loop: per iteration, sample a group of candidates
// per task from the pre-update policy, normalize their rewards into
// advantages, and ascend the surrogate objective. The pre-update policy is
// the old policy; the initial (uniform) policy is the reference.
// Deterministic for a fixed seed. Errors: GroupTooSmall, NoCandidates.
ToyTrainResult toy_train(const std::vector<ToyTask>& tasks, const Registry& r,
                         const ToyTrainConfig& config);

// "iteration,mean_reward,objective" rows with a header line.
std::string curve_csv(const ToyTrainResult& result);

} // namespace lego
