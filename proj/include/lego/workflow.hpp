#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lego {

// The four wire-level value types every tool slot carries.
enum class SemanticType { Image, Mask, Str, Float };

std::string to_string(SemanticType t);
SemanticType semantic_type_from_string(const std::string& s);

// A value reference as it appears in a step input or in the result list:
// init[slot], stepN[slot], a literal, or null.
struct ValueRef {
    enum class Kind { Init, Step, LiteralText, LiteralNumber, Null };

    Kind kind = Kind::Null;
    int step = 0;          // Kind::Step only, 1-based
    std::string field;     // Init / Step slot name
    std::string text;      // LiteralText
    double number = 0.0;   // LiteralNumber

    static ValueRef init(std::string slot);
    static ValueRef step_ref(int step, std::string slot);
    static ValueRef literal(std::string text);
    static ValueRef literal(double value);
    static ValueRef null();

    bool is_null() const { return kind == Kind::Null; }

    bool operator==(const ValueRef&) const = default;
};

struct Step {
    int index = 0;
    std::string model;
    // Insertion-ordered; slot names are unique per direction.
    std::vector<std::pair<std::string, ValueRef>> inputs;
    // Advisory: the authoritative output slots come from the ToolSpec.
    std::vector<std::pair<std::string, std::string>> declared_outputs;
    // Unknown keys, kept verbatim (as compact JSON text) for round-trips.
    std::vector<std::pair<std::string, std::string>> extras;

    const ValueRef* find_input(const std::string& slot) const;

    bool operator==(const Step&) const = default;
};

struct Workflow {
    std::string process;
    std::vector<Step> steps;
    std::vector<ValueRef> result;
    // Parse-time notes (fixture quirks); not part of workflow identity.
    std::vector<std::string> warnings;

    const Step* find_step(int index) const;

    bool operator==(const Workflow& o) const {
        return process == o.process && steps == o.steps && result == o.result;
    }
};

// Dependency graph over step indices; edge (i, j) means step j consumes an
// output of step i. Edges are sorted and deduplicated, and always have i < j.
struct DepGraph {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;

    bool operator==(const DepGraph&) const = default;
};

// Grammar: init[<slot>] | step<k>[<slot>] | null | decimal literal | text.
// Throws Error("MalformedRef") for broken reference syntax such as
// step0[x], step[x], or unbalanced brackets on a ref-shaped token.
ValueRef parse_value_ref(const std::string& token);

std::string serialize_value_ref(const ValueRef& r);

// Parses the wire format (UTF-8 JSON, `process` + `pipeline`). Tolerates the
// known fixture quirks (trailing commas, key-less outputs, quoted bracketed
// result strings) and records them as warnings. Throws Error with code
// SyntaxError, MalformedRef, NonConsecutiveSteps, EmptyResult, or
// ForwardReference.
Workflow parse_workflow(const std::string& document);

// Canonical form: per-step keys ordered step/model/input/output, key-less
// outputs normalized, result emitted as a proper list.
std::string serialize_workflow(const Workflow& w);

DepGraph workflow_graph(const Workflow& w);

} // namespace lego
