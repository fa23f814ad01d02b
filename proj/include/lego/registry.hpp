#pragma once

#include "lego/workflow.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lego {

enum class ToolKind { Predictive, Editing, Auxiliary };

std::string to_string(ToolKind k);

struct SlotSpec {
    std::string name;
    SemanticType type = SemanticType::Image;
    bool nullable = false;
};

// Structured invocation constraints attached to a tool.
struct Constraint {
    enum class Kind {
        ExactlyOneKind,     // exactly one of group_a / group_b is (partly) bound
        AllOrNoneNull,      // slots are all null or all non-null
        RequiresNonNull,    // slot must be bound non-null
        PromptPrefix,       // text slot must start with prefix (case-insensitive)
        PairedNullability,  // slots are all null or all non-null, as a pair
    };
    Kind kind = Kind::RequiresNonNull;
    std::vector<std::string> group_a;
    std::vector<std::string> group_b;
    std::vector<std::string> slots;
    std::string slot;
    std::string prefix;
};

struct ConstraintViolation {
    Constraint::Kind kind;
    std::string message;
};

struct ToolSpec {
    std::string canonical_name;
    std::vector<std::string> aliases;
    ToolKind kind = ToolKind::Predictive;
    std::vector<SlotSpec> inputs;
    std::vector<SlotSpec> outputs;
    std::vector<Constraint> constraints;
    std::string description;

    const SlotSpec* find_input(const std::string& name) const;
    const SlotSpec* find_output(const std::string& name) const;
};

// Immutable value-semantics registry; register_tool / with_tool returns a
// new registry and never touches the original.
class Registry {
public:
    Registry() = default;

    // load_registry: parses the declarative registry document.
    static Registry from_document(const std::string& json_text);
    // The default document bundled with the engine (data/registry.json).
    static Registry bundled_default();

    Registry with_tool(ToolSpec spec) const;

    // nullptr when the name resolves to nothing.
    const ToolSpec* find(const std::string& name) const;
    // Throws Error("UnknownTool").
    const ToolSpec& lookup(const std::string& name) const;

    std::size_t size() const { return tools_.size(); }
    const std::vector<ToolSpec>& tools() const { return tools_; }

    // Chain-forming tools seed editing chains; auxiliary tools do not.
    bool is_chain_forming(const ToolSpec& spec) const {
        return spec.kind == ToolKind::Editing;
    }

private:
    void index_tool(std::size_t i);

    std::vector<ToolSpec> tools_;
    std::map<std::string, std::size_t> by_name_;
};

const char* default_registry_json();

// Static view of a slot binding, enough to evaluate constraints: whether it
// is null-bound, and the literal text when one is statically known.
struct Binding {
    bool null = true;
    std::optional<std::string> text;
};
using BindingMap = std::map<std::string, Binding>;

std::vector<ConstraintViolation> check_constraints(const ToolSpec& spec,
                                                   const BindingMap& bound);

// Convenience overload for ValueRef-level (static) bindings.
std::vector<ConstraintViolation> check_constraints(
    const ToolSpec& spec,
    const std::vector<std::pair<std::string, ValueRef>>& bound);

// Human-readable constraint prose used by prompt assembly.
std::string describe_constraint(const Constraint& c);

} // namespace lego
