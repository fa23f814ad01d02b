#include "lego/toy_train.hpp"

#include "lego/errors.hpp"
#include "lego/graph_match.hpp"
#include "lego/validator.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

using ordered_json = nlohmann::ordered_json;

namespace lego {

std::vector<ToyTask> load_toy_tasks(const std::string& json_document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_document);
    } catch (const std::exception& e) {
        fail("SyntaxError", std::string("task fixture: ") + e.what());
    }
    if (!doc.is_array()) fail("SyntaxError", "task fixture must be an array");

    std::vector<ToyTask> tasks;
    for (const auto& entry : doc) {
        ToyTask task;
        task.id = entry.value("id", "");
        task.instruction = entry.value("instruction", "");
        if (!entry.contains("gt") || !entry.contains("candidates"))
            fail("SyntaxError", "task needs 'gt' and 'candidates'");
        task.gt = parse_workflow(entry.at("gt").dump());
        for (const auto& cand : entry.at("candidates"))
            task.candidates.push_back(parse_workflow(cand.dump()));
        if (task.candidates.size() < 2)
            fail("NoCandidates", "task '" + task.id + "' needs >= 2 candidates");
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - peak);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

std::vector<double> grpo_logit_gradient(const std::vector<double>& logits,
                                        const std::vector<int>& samples,
                                        const std::vector<double>& advantages,
                                        const std::vector<double>& logp_old,
                                        const std::vector<double>& logp_ref,
                                        double epsilon, double beta) {
    const std::size_t g = samples.size();
    if (advantages.size() != g || logp_old.size() != g || logp_ref.size() != g)
        fail("NonFiniteInput", "sample vectors must share one length");

    const std::vector<double> probs = softmax(logits);
    std::vector<double> grad(logits.size(), 0.0);
    for (std::size_t j = 0; j < g; ++j) {
        const int c = samples[j];
        const double logp_new = std::log(probs[static_cast<std::size_t>(c)]);
        const double ratio = std::exp(logp_new - logp_old[j]);
        // The clipped branch of min(ratio*A, clip(ratio)*A) is constant in
        // the logits, so it contributes no gradient.
        const bool unclipped_active =
            ratio * advantages[j] <=
            std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantages[j];
        double coef = unclipped_active ? advantages[j] * ratio : 0.0;
        const double d = logp_ref[j] - logp_new;
        coef -= beta * (1.0 - std::exp(d));
        for (std::size_t k = 0; k < grad.size(); ++k) {
            const double indicator = static_cast<int>(k) == c ? 1.0 : 0.0;
            grad[k] += coef * (indicator - probs[k]);
        }
    }
    for (double& v : grad) v /= static_cast<double>(g);
    return grad;
}

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_index(const std::vector<double>& probs, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

} // namespace

ToyTrainResult toy_train(const std::vector<ToyTask>& tasks, const Registry& r,
                         const ToyTrainConfig& config) {
    if (config.group_size < 2)
        fail("GroupTooSmall", "group size must be >= 2");
    if (tasks.empty()) fail("NoCandidates", "no tasks given");

    ToyTrainResult result;
    std::vector<std::vector<double>> logits;
    for (const auto& task : tasks) {
        if (task.candidates.size() < 2)
            fail("NoCandidates", "task '" + task.id + "' needs >= 2 candidates");
        std::vector<double> rewards;
        for (const auto& candidate : task.candidates) {
            const ValidationReport report = validate_workflow(candidate, r);
            const double r_sim = similarity_reward(candidate, task.gt, &r);
            rewards.push_back(valid_reward(report) + r_sim);
        }
        result.candidate_rewards.push_back(std::move(rewards));
        logits.emplace_back(task.candidates.size(), 0.0);
    }
    const std::vector<std::vector<double>> ref_logits = logits;

    std::mt19937_64 rng(config.seed);
    for (int iter = 0; iter < config.iterations; ++iter) {
        const std::vector<std::vector<double>> old_logits = logits;
        double reward_sum = 0.0;
        double objective_sum = 0.0;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const std::vector<double> old_probs = softmax(old_logits[t]);
            const std::vector<double> ref_probs = softmax(ref_logits[t]);

            std::vector<int> samples;
            std::vector<double> rewards, logp_old, logp_ref;
            for (int j = 0; j < config.group_size; ++j) {
                const int c = sample_index(old_probs, rng);
                samples.push_back(c);
                rewards.push_back(
                    result.candidate_rewards[t][static_cast<std::size_t>(c)]);
                logp_old.push_back(
                    std::log(old_probs[static_cast<std::size_t>(c)]));
                logp_ref.push_back(
                    std::log(ref_probs[static_cast<std::size_t>(c)]));
                reward_sum += rewards.back();
            }
            const std::vector<double> advantages = group_advantages(rewards);

            GroupBatch batch;
            batch.advantages = advantages;
            batch.logp_old = logp_old;
            batch.logp_ref = logp_ref;
            batch.epsilon = config.epsilon;
            batch.beta = config.beta;
            const std::vector<double> probs = softmax(logits[t]);
            for (int c : samples)
                batch.logp_new.push_back(
                    std::log(probs[static_cast<std::size_t>(c)]));
            objective_sum += grpo_objective(batch);

            const std::vector<double> grad = grpo_logit_gradient(
                logits[t], samples, advantages, logp_old, logp_ref,
                config.epsilon, config.beta);
            for (std::size_t k = 0; k < grad.size(); ++k)
                logits[t][k] += config.step_size * grad[k];
        }
        ToyIterationStats stats;
        stats.iteration = iter;
        stats.mean_reward = reward_sum / (static_cast<double>(tasks.size()) *
                                          config.group_size);
        stats.objective = objective_sum / static_cast<double>(tasks.size());
        result.curve.push_back(stats);
    }

    for (const auto& task_logits : logits)
        result.final_probs.push_back(softmax(task_logits));
    return result;
}

std::string curve_csv(const ToyTrainResult& result) {
    std::string out = "iteration,mean_reward,objective\n";
    char line[96];
    for (const auto& stats : result.curve) {
        std::snprintf(line, sizeof(line), "%d,%.6f,%.6f\n", stats.iteration,
                      stats.mean_reward, stats.objective);
        out += line;
    }
    return out;
}

} // namespace lego
