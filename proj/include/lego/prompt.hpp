#pragma once

#include "lego/registry.hpp"
#include "lego/workflow.hpp"

#include <string>
#include <utility>
#include <vector>

namespace lego {

// Renders the planner prompt: system role and processing rules, the model
// library generated from the registry (PREDICT and EDIT sections), few-shot
// examples, and the trailing instruction line. Every registered tool appears
// exactly once under its canonical name. Error("EmptyRegistry") when the
// registry holds no tools.
std::string assemble_builder_prompt(
    const Registry& r,
    const std::vector<std::pair<std::string, Workflow>>& examples,
    const std::string& instruction);

} // namespace lego
