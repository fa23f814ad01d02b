#include "lego/validator.hpp"

#include "lego/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <tuple>

using ordered_json = nlohmann::ordered_json;

namespace lego {

std::string to_string(Diagnostic::Code c) {
    switch (c) {
        case Diagnostic::Code::UnknownTool: return "UnknownTool";
        case Diagnostic::Code::TypeMismatch: return "TypeMismatch";
        case Diagnostic::Code::ForwardReference: return "ForwardReference";
        case Diagnostic::Code::UnresolvedRef: return "UnresolvedRef";
        case Diagnostic::Code::ConstraintViolation: return "ConstraintViolation";
        case Diagnostic::Code::NonConsecutiveSteps: return "NonConsecutiveSteps";
        case Diagnostic::Code::EmptyResult: return "EmptyResult";
        case Diagnostic::Code::RedundantStep: return "RedundantStep";
        case Diagnostic::Code::BadResultType: return "BadResultType";
        case Diagnostic::Code::OutputKeyMismatch: return "OutputKeyMismatch";
    }
    return "?";
}

namespace {

void sort_diagnostics(std::vector<Diagnostic>& ds) {
    std::stable_sort(ds.begin(), ds.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                         return std::tie(a.step, a.code, a.ref) <
                                std::tie(b.step, b.code, b.ref);
                     });
}

ordered_json diagnostics_to_json(const std::vector<Diagnostic>& ds) {
    ordered_json arr = ordered_json::array();
    for (const auto& d : ds) {
        ordered_json j;
        j["code"] = to_string(d.code);
        j["step"] = d.step;
        j["ref"] = d.ref;
        j["message"] = d.message;
        arr.push_back(std::move(j));
    }
    return arr;
}

} // namespace

std::string ValidationReport::to_json() const {
    ordered_json j;
    j["executable"] = executable;
    j["errors"] = diagnostics_to_json(errors);
    j["warnings"] = diagnostics_to_json(warnings);
    ordered_json types = ordered_json::object();
    for (const auto& [ref, type] : inferred_types) types[ref] = to_string(type);
    j["inferred_types"] = types;
    return j.dump(2);
}

ValidationReport validate_workflow(const Workflow& w, const Registry& r,
                                   const InitSlots& init_slots) {
    ValidationReport report;
    auto error = [&](Diagnostic::Code code, int step, std::string ref,
                     std::string message) {
        report.errors.push_back({code, step, std::move(ref), std::move(message)});
    };
    auto warn = [&](Diagnostic::Code code, int step, std::string ref,
                    std::string message) {
        report.warnings.push_back(
            {code, step, std::move(ref), std::move(message)});
    };

    // Step numbering. The parser enforces this for wire-format input; checked
    // again for programmatically built workflows.
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        if (w.steps[i].index != static_cast<int>(i) + 1) {
            error(Diagnostic::Code::NonConsecutiveSteps, w.steps[i].index, "",
                  "step indices must be exactly 1..K in order");
        }
    }

    std::map<std::string, SemanticType> inferred;
    // Resolves a reference to its type; reports and returns nullopt on
    // failure. `consumer` is the consuming step index (0 for result refs).
    auto resolve = [&](const ValueRef& ref,
                       int consumer) -> std::optional<SemanticType> {
        switch (ref.kind) {
            case ValueRef::Kind::Null: return std::nullopt;
            case ValueRef::Kind::LiteralText: return SemanticType::Str;
            case ValueRef::Kind::LiteralNumber: return SemanticType::Float;
            case ValueRef::Kind::Init: {
                auto it = init_slots.find(ref.field);
                if (it == init_slots.end()) {
                    error(Diagnostic::Code::UnresolvedRef, consumer,
                          serialize_value_ref(ref),
                          "no init slot named '" + ref.field + "'");
                    return std::nullopt;
                }
                inferred[serialize_value_ref(ref)] = it->second;
                return it->second;
            }
            case ValueRef::Kind::Step: {
                if (consumer != 0 && ref.step >= consumer) {
                    error(Diagnostic::Code::ForwardReference, consumer,
                          serialize_value_ref(ref),
                          "reference does not point strictly backwards");
                    return std::nullopt;
                }
                const Step* producer = w.find_step(ref.step);
                if (!producer) {
                    error(Diagnostic::Code::UnresolvedRef, consumer,
                          serialize_value_ref(ref),
                          "no step " + std::to_string(ref.step));
                    return std::nullopt;
                }
                const ToolSpec* tool = r.find(producer->model);
                if (!tool) return std::nullopt;  // UnknownTool reported there
                const SlotSpec* slot = tool->find_output(ref.field);
                if (!slot) {
                    error(Diagnostic::Code::UnresolvedRef, consumer,
                          serialize_value_ref(ref),
                          "tool '" + tool->canonical_name +
                              "' has no output slot '" + ref.field + "'");
                    return std::nullopt;
                }
                inferred[serialize_value_ref(ref)] = slot->type;
                return slot->type;
            }
        }
        return std::nullopt;
    };

    for (const auto& step : w.steps) {
        const ToolSpec* tool = r.find(step.model);
        if (!tool) {
            error(Diagnostic::Code::UnknownTool, step.index, step.model,
                  "no tool named '" + step.model + "'");
            continue;
        }

        std::set<std::string> bound;
        for (const auto& [slot_name, ref] : step.inputs) {
            bound.insert(slot_name);
            const SlotSpec* slot = tool->find_input(slot_name);
            if (!slot) {
                error(Diagnostic::Code::UnresolvedRef, step.index, slot_name,
                      "tool '" + tool->canonical_name +
                          "' has no input slot '" + slot_name + "'");
                continue;
            }
            if (ref.is_null()) {
                if (!slot->nullable)
                    error(Diagnostic::Code::TypeMismatch, step.index, slot_name,
                          "null bound to non-nullable slot");
                continue;
            }
            auto type = resolve(ref, step.index);
            if (!type) continue;
            if (*type == slot->type) continue;
            if (*type == SemanticType::Float && slot->type == SemanticType::Str) {
                warn(Diagnostic::Code::TypeMismatch, step.index, slot_name,
                     "numeric literal coerced to Str");
                continue;
            }
            error(Diagnostic::Code::TypeMismatch, step.index, slot_name,
                  to_string(*type) + " bound to " + to_string(slot->type) +
                      " slot '" + slot_name + "'");
        }

        for (const auto& slot : tool->inputs) {
            if (!slot.nullable && !bound.count(slot.name))
                error(Diagnostic::Code::TypeMismatch, step.index, slot.name,
                      "required input slot '" + slot.name + "' is unbound");
        }

        for (const auto& v : check_constraints(*tool, step.inputs))
            error(Diagnostic::Code::ConstraintViolation, step.index, "",
                  tool->canonical_name + ": " + v.message);

        // Declared outputs are advisory; mismatches against the tool spec are
        // warnings only.
        for (const auto& [key, ref_text] : step.declared_outputs) {
            if (!tool->find_output(key)) {
                warn(Diagnostic::Code::OutputKeyMismatch, step.index, key,
                     "tool '" + tool->canonical_name +
                         "' has no output slot '" + key + "'");
                continue;
            }
            try {
                ValueRef ref = parse_value_ref(ref_text);
                if (ref.kind != ValueRef::Kind::Step || ref.step != step.index ||
                    ref.field != key)
                    warn(Diagnostic::Code::OutputKeyMismatch, step.index, key,
                         "declared output '" + ref_text +
                             "' does not name this step's slot '" + key + "'");
            } catch (const Error&) {
                warn(Diagnostic::Code::OutputKeyMismatch, step.index, key,
                     "declared output '" + ref_text + "' is not a reference");
            }
        }
    }

    // Result checks.
    if (w.result.empty()) {
        error(Diagnostic::Code::EmptyResult, 0, "", "result list is empty");
    }
    for (const auto& ref : w.result) {
        auto type = resolve(ref, 0);
        if (type && *type != SemanticType::Image)
            warn(Diagnostic::Code::BadResultType, 0, serialize_value_ref(ref),
                 "result reference has type " + to_string(*type));
        if (ref.is_null())
            warn(Diagnostic::Code::BadResultType, 0, "null",
                 "null result reference");
    }

    // Redundancy: a step none of whose outputs is consumed downstream or in
    // the result.
    for (const auto& step : w.steps) {
        bool consumed = false;
        for (const auto& other : w.steps) {
            for (const auto& [slot, ref] : other.inputs) {
                (void)slot;
                if (ref.kind == ValueRef::Kind::Step && ref.step == step.index)
                    consumed = true;
            }
        }
        for (const auto& ref : w.result)
            if (ref.kind == ValueRef::Kind::Step && ref.step == step.index)
                consumed = true;
        if (!consumed)
            warn(Diagnostic::Code::RedundantStep, step.index, "",
                 "no output of this step is used downstream or in the result");
    }

    sort_diagnostics(report.errors);
    sort_diagnostics(report.warnings);
    report.inferred_types.assign(inferred.begin(), inferred.end());
    report.executable = report.errors.empty();
    return report;
}

} // namespace lego
