#include "lego/executor.hpp"

#include "lego/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

using ordered_json = nlohmann::ordered_json;

namespace lego {

std::string ExecutionResult::trace_jsonl() const {
    std::ostringstream os;
    for (const auto& entry : trace) {
        ordered_json j;
        j["step"] = entry.step;
        j["tool"] = entry.tool;
        ordered_json outs = ordered_json::object();
        for (const auto& [slot, summary] : entry.outputs) outs[slot] = summary;
        j["outputs"] = outs;
        os << j.dump() << "\n";
    }
    return os.str();
}

std::vector<int> topological_schedule(const DepGraph& g) {
    std::map<int, int> indegree;
    std::map<int, std::vector<int>> out;
    for (int i = 1; i <= g.node_count; ++i) indegree[i] = 0;
    for (const auto& [from, to] : g.edges) {
        indegree.try_emplace(from, 0);
        indegree.try_emplace(to, 0);
        out[from].push_back(to);
        ++indegree[to];
    }
    std::set<int> ready;
    for (const auto& [node, deg] : indegree)
        if (deg == 0) ready.insert(node);

    std::vector<int> order;
    while (!ready.empty()) {
        const int node = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(node);
        for (int next : out[node])
            if (--indegree[next] == 0) ready.insert(next);
    }
    if (order.size() != indegree.size())
        fail("CycleDetected", "dependency graph is cyclic");
    return order;
}

namespace {

SemanticType value_type(const Value& v) {
    if (v.image()) return SemanticType::Image;
    if (v.mask()) return SemanticType::Mask;
    if (v.text()) return SemanticType::Str;
    return SemanticType::Float;
}

BindingMap bindings_from_values(const std::map<std::string, Value>& inputs) {
    BindingMap map;
    for (const auto& [slot, v] : inputs) {
        Binding b;
        b.null = v.is_nil();
        if (const std::string* s = v.text()) b.text = *s;
        map[slot] = b;
    }
    return map;
}

const MaskBuf* mask_or_null(const std::map<std::string, Value>& inputs,
                            const std::string& slot) {
    auto it = inputs.find(slot);
    return it == inputs.end() ? nullptr : it->second.mask();
}

const ImageBuf* image_or_null(const std::map<std::string, Value>& inputs,
                              const std::string& slot) {
    auto it = inputs.find(slot);
    return it == inputs.end() ? nullptr : it->second.image();
}

std::map<std::string, Value> run_builtin(const std::string& name,
                                         const std::map<std::string, Value>& in) {
    auto pack = [](MaskImagePair&& pair) {
        std::map<std::string, Value> out;
        out["mask"] =
            pair.first ? Value::msk(std::move(*pair.first)) : Value::nil();
        out["image"] =
            pair.second ? Value::img(std::move(*pair.second)) : Value::nil();
        return out;
    };
    if (name == "INVERSE")
        return pack(op_inverse(mask_or_null(in, "mask1"), mask_or_null(in, "mask2"),
                               image_or_null(in, "image1"),
                               image_or_null(in, "image2")));
    if (name == "COMPOSE")
        return pack(op_compose(mask_or_null(in, "mask1"), mask_or_null(in, "mask2"),
                               image_or_null(in, "image1"),
                               image_or_null(in, "image2")));
    if (name == "RESIZE") {
        auto it = in.find("ratio");
        if (it == in.end() || !it->second.number())
            fail("MissingBinding", "RESIZE requires a numeric ratio");
        return pack(op_resize(mask_or_null(in, "mask"), image_or_null(in, "image"),
                              *it->second.number()));
    }
    if (name == "BBOX") {
        const MaskBuf* mask = mask_or_null(in, "mask");
        if (!mask) fail("MissingBinding", "BBOX requires a mask");
        std::map<std::string, Value> out;
        out["mask"] = Value::msk(op_bbox(*mask));
        return out;
    }
    fail("UnknownTool", "no builtin named '" + name + "'");
}

bool is_builtin(const std::string& canonical) {
    return canonical == "INVERSE" || canonical == "COMPOSE" ||
           canonical == "RESIZE" || canonical == "BBOX";
}

} // namespace

ExecutionResult execute_workflow(const Workflow& w, const Registry& r,
                                 Backend& backend,
                                 const std::map<std::string, Value>& init,
                                 std::uint64_t seed) {
    ExecutionResult result;
    std::map<std::pair<int, std::string>, Value> env;

    auto resolve = [&](const ValueRef& ref) -> Value {
        switch (ref.kind) {
            case ValueRef::Kind::Null: return Value::nil();
            case ValueRef::Kind::LiteralText: return Value::txt(ref.text);
            case ValueRef::Kind::LiteralNumber: return Value::num(ref.number);
            case ValueRef::Kind::Init: {
                auto it = init.find(ref.field);
                if (it == init.end())
                    fail("MissingBinding",
                         "no init value for '" + ref.field + "'");
                return it->second;
            }
            case ValueRef::Kind::Step: {
                auto it = env.find({ref.step, ref.field});
                if (it == env.end())
                    fail("MissingBinding",
                         "no value for " + serialize_value_ref(ref));
                return it->second;
            }
        }
        fail("MissingBinding", "unresolvable reference");
    };

    std::vector<int> schedule;
    try {
        schedule = topological_schedule(workflow_graph(w));
    } catch (const Error& e) {
        result.fault_reason = e.what();
        return result;
    }

    for (int index : schedule) {
        const Step* step = w.find_step(index);
        if (!step) {
            result.fault_step = index;
            result.fault_reason = "MissingBinding: no step " + std::to_string(index);
            return result;
        }
        const auto started = std::chrono::steady_clock::now();
        try {
            const ToolSpec& tool = r.lookup(step->model);

            std::map<std::string, Value> inputs;
            for (const auto& [slot_name, ref] : step->inputs) {
                const SlotSpec* slot = tool.find_input(slot_name);
                if (!slot)
                    fail("MissingBinding", "tool '" + tool.canonical_name +
                                               "' has no input slot '" +
                                               slot_name + "'");
                Value v = resolve(ref);
                if (v.is_nil()) {
                    if (!slot->nullable)
                        fail("TypeMismatch",
                             "null bound to non-nullable slot '" + slot_name + "'");
                    inputs[slot_name] = std::move(v);
                    continue;
                }
                SemanticType t = value_type(v);
                if (t == SemanticType::Float && slot->type == SemanticType::Str)
                    v = Value::txt(serialize_value_ref(
                        ValueRef::literal(*v.number())));
                else if (t != slot->type)
                    fail("TypeMismatch", to_string(t) + " bound to " +
                                             to_string(slot->type) + " slot '" +
                                             slot_name + "'");
                inputs[slot_name] = std::move(v);
            }
            for (const auto& slot : tool.inputs)
                if (!slot.nullable && !inputs.count(slot.name))
                    fail("MissingBinding",
                         "required input slot '" + slot.name + "' is unbound");

            const auto violations =
                check_constraints(tool, bindings_from_values(inputs));
            if (!violations.empty())
                fail("ConstraintViolation",
                     tool.canonical_name + ": " + violations.front().message);

            std::map<std::string, Value> outputs =
                is_builtin(tool.canonical_name)
                    ? run_builtin(tool.canonical_name, inputs)
                    : backend.invoke(tool, inputs, seed);

            TraceEntry entry;
            entry.step = index;
            entry.tool = tool.canonical_name;
            entry.duration_ms =
                std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();
            for (auto& [slot, value] : outputs) {
                entry.outputs.emplace_back(slot, value.summary());
                env[{index, slot}] = std::move(value);
            }
            result.trace.push_back(std::move(entry));
        } catch (const Error& e) {
            result.fault_step = index;
            result.fault_reason = e.what();
            return result;
        }
    }

    try {
        for (const auto& ref : w.result) result.results.push_back(resolve(ref));
    } catch (const Error& e) {
        result.fault_step = 0;
        result.fault_reason = e.what();
        result.results.clear();
        return result;
    }

    result.status = ExecutionResult::Status::Ok;
    return result;
}

} // namespace lego
