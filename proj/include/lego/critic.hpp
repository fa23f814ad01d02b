#pragma once

#include "lego/registry.hpp"
#include "lego/rewards.hpp"
#include "lego/workflow.hpp"

#include <string>
#include <vector>

namespace lego {

// Human-level description of one editing chain's effect.
struct MetaEdit {
    std::string verb;  // add|remove|recolor|restyle|re-environment|re-pose|fill|change-background
    std::string target;
    std::string region_provenance;
    std::string editor_tool;

    // Equality for critique purposes: verb plus case-folded target. The
    // provenance is advisory context only.
    std::string canonical_key() const;

    bool operator==(const MetaEdit&) const = default;
};

struct Critique {
    std::vector<int> remove_indices;  // into the judged meta-edit list
    std::vector<MetaEdit> additions;

    int n_remove() const { return static_cast<int>(remove_indices.size()); }
    int n_add() const { return static_cast<int>(additions.size()); }
};

// Scoring fixture: what the instruction demands, as canonical meta edits.
struct TaskSpec {
    std::string instruction;
    std::vector<MetaEdit> required_edits;

    static TaskSpec from_json(const std::string& document);
};

// Deterministic verb/target/provenance extraction from a chain.
MetaEdit abstract_chain(const EditChain& chain, const Workflow& w,
                        const Registry& r);

class Critic {
public:
    virtual ~Critic() = default;
    virtual Critique review(const std::vector<MetaEdit>& meta_edits,
                            const std::string& instruction) = 0;
};

// Set-difference critic: flags generated edits outside the required set for
// removal and reports required edits with no generated counterpart as
// additions. Pure and deterministic.
class MockCritic final : public Critic {
public:
    explicit MockCritic(TaskSpec task) : task_(std::move(task)) {}
    Critique review(const std::vector<MetaEdit>& meta_edits,
                    const std::string& instruction) override;

private:
    TaskSpec task_;
};

// Runs the critic and enforces the Critique invariants (distinct, in-range
// removal indices). Errors: CriticUnavailable, MalformedCritique.
Critique judge(const std::vector<MetaEdit>& meta_edits,
               const std::string& instruction, Critic& critic);

struct RemoteCriticConfig {
    std::string endpoint;  // e.g. http://host:port/path
    std::string token;     // optional bearer token
    int timeout_sec = 30;
    int retries = 1;

    // Reads LEGO_CRITIC_ENDPOINT and LEGO_CRITIC_TOKEN.
    static RemoteCriticConfig from_env();
};

// POST {instruction, meta_edits} and expect {remove_indices, additions}.
// Transport failures retry once, then Error("CriticUnavailable"); schema
// violations are Error("MalformedCritique") and never silently defaulted.
Critique remote_critic_call(const RemoteCriticConfig& config,
                            const std::vector<MetaEdit>& meta_edits,
                            const std::string& instruction);

class RemoteCritic final : public Critic {
public:
    explicit RemoteCritic(RemoteCriticConfig config)
        : config_(std::move(config)) {}
    Critique review(const std::vector<MetaEdit>& meta_edits,
                    const std::string& instruction) override {
        return remote_critic_call(config_, meta_edits, instruction);
    }

private:
    RemoteCriticConfig config_;
};

} // namespace lego
