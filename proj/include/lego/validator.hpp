#pragma once

#include "lego/registry.hpp"
#include "lego/workflow.hpp"

#include <map>
#include <string>
#include <vector>

namespace lego {

struct Diagnostic {
    enum class Code {
        UnknownTool,
        TypeMismatch,
        ForwardReference,
        UnresolvedRef,
        ConstraintViolation,
        NonConsecutiveSteps,
        EmptyResult,
        RedundantStep,
        BadResultType,
        OutputKeyMismatch,
    };

    Code code = Code::UnknownTool;
    int step = 0;  // 0 = workflow level
    std::string ref;
    std::string message;
};

std::string to_string(Diagnostic::Code c);

struct ValidationReport {
    bool executable = false;  // true iff errors is empty
    std::vector<Diagnostic> errors;
    std::vector<Diagnostic> warnings;
    // serialized ref -> inferred type, for every resolvable reference
    std::vector<std::pair<std::string, SemanticType>> inferred_types;

    std::string to_json() const;
};

using InitSlots = std::map<std::string, SemanticType>;

inline InitSlots default_init_slots() {
    return {{"image", SemanticType::Image}};
}

// Static executability check: the ground truth behind the validity reward.
// Pure; diagnostics are deterministically ordered by (step, code).
ValidationReport validate_workflow(const Workflow& w, const Registry& r,
                                   const InitSlots& init_slots = default_init_slots());

} // namespace lego
