#include "lego/workflow.hpp"

#include "lego/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

using ordered_json = nlohmann::ordered_json;

namespace lego {

std::string to_string(SemanticType t) {
    switch (t) {
        case SemanticType::Image: return "Image";
        case SemanticType::Mask: return "Mask";
        case SemanticType::Str: return "Str";
        case SemanticType::Float: return "Float";
    }
    return "?";
}

SemanticType semantic_type_from_string(const std::string& s) {
    if (s == "Image") return SemanticType::Image;
    if (s == "Mask") return SemanticType::Mask;
    if (s == "Str") return SemanticType::Str;
    if (s == "Float") return SemanticType::Float;
    fail("SyntaxError", "unknown semantic type '" + s + "'");
}

ValueRef ValueRef::init(std::string slot) {
    ValueRef r;
    r.kind = Kind::Init;
    r.field = std::move(slot);
    return r;
}

ValueRef ValueRef::step_ref(int step, std::string slot) {
    ValueRef r;
    r.kind = Kind::Step;
    r.step = step;
    r.field = std::move(slot);
    return r;
}

ValueRef ValueRef::literal(std::string text) {
    ValueRef r;
    r.kind = Kind::LiteralText;
    r.text = std::move(text);
    return r;
}

ValueRef ValueRef::literal(double value) {
    ValueRef r;
    r.kind = Kind::LiteralNumber;
    r.number = value;
    return r;
}

ValueRef ValueRef::null() { return ValueRef{}; }

const ValueRef* Step::find_input(const std::string& slot) const {
    for (const auto& [name, ref] : inputs)
        if (name == slot) return &ref;
    return nullptr;
}

const Step* Workflow::find_step(int index) const {
    for (const auto& s : steps)
        if (s.index == index) return &s;
    return nullptr;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(s, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == s.size();
}

// Strips commas that directly precede a closing brace/bracket, outside
// strings. The paper's fixtures carry them.
std::string strip_trailing_commas(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            out.push_back(c);
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
            out.push_back(c);
            continue;
        }
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < text.size() &&
                   std::isspace(static_cast<unsigned char>(text[j])))
                ++j;
            if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;
        }
        out.push_back(c);
    }
    return out;
}

ValueRef ref_from_json(const ordered_json& v) {
    if (v.is_null()) return ValueRef::null();
    if (v.is_number()) return ValueRef::literal(v.get<double>());
    if (v.is_string()) return parse_value_ref(v.get<std::string>());
    fail("SyntaxError", "input value must be a string, number, or null");
}

// Splits a "[step1[image], step3[image]]" style quoted result string into
// top-level tokens.
std::vector<std::string> split_bracketed_list(const std::string& body) {
    std::vector<std::string> tokens;
    int depth = 0;
    std::string cur;
    for (char c : body) {
        if (c == '[') ++depth;
        if (c == ']') --depth;
        if (c == ',' && depth == 0) {
            tokens.push_back(trim(cur));
            cur.clear();
            continue;
        }
        cur.push_back(c);
    }
    if (!trim(cur).empty()) tokens.push_back(trim(cur));
    return tokens;
}

ordered_json ref_to_json(const ValueRef& r) {
    switch (r.kind) {
        case ValueRef::Kind::Null: return nullptr;
        case ValueRef::Kind::LiteralNumber: return r.number;
        default: return serialize_value_ref(r);
    }
}

} // namespace

ValueRef parse_value_ref(const std::string& token) {
    const std::string t = trim(token);
    if (t == "null") return ValueRef::null();

    const std::size_t bracket = t.find('[');
    const bool ref_shaped =
        t.rfind("init", 0) == 0 || t.rfind("step", 0) == 0;
    if (ref_shaped && bracket != std::string::npos) {
        if (t.back() != ']' || t.find(']') != t.size() - 1)
            fail("MalformedRef", "unbalanced brackets in '" + t + "'");
        const std::string head = t.substr(0, bracket);
        const std::string slot = t.substr(bracket + 1, t.size() - bracket - 2);
        if (!is_identifier(slot))
            fail("MalformedRef", "bad slot name in '" + t + "'");
        if (head == "init") return ValueRef::init(slot);
        const std::string digits = head.substr(4);
        if (digits.empty() ||
            !std::all_of(digits.begin(), digits.end(), [](char c) {
                return std::isdigit(static_cast<unsigned char>(c));
            }))
            fail("MalformedRef", "bad step index in '" + t + "'");
        if (digits.size() > 6)
            fail("MalformedRef", "step index out of range in '" + t + "'");
        const int k = std::stoi(digits);
        if (k < 1) fail("MalformedRef", "step index must be >= 1 in '" + t + "'");
        return ValueRef::step_ref(k, slot);
    }

    double num = 0.0;
    if (parse_number(t, num)) return ValueRef::literal(num);
    return ValueRef::literal(std::string(t));
}

std::string serialize_value_ref(const ValueRef& r) {
    switch (r.kind) {
        case ValueRef::Kind::Init: return "init[" + r.field + "]";
        case ValueRef::Kind::Step:
            return "step" + std::to_string(r.step) + "[" + r.field + "]";
        case ValueRef::Kind::LiteralText: return r.text;
        case ValueRef::Kind::LiteralNumber: {
            return ordered_json(r.number).dump();
        }
        case ValueRef::Kind::Null: return "null";
    }
    return "null";
}

Workflow parse_workflow(const std::string& document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(strip_trailing_commas(document));
    } catch (const std::exception& e) {
        fail("SyntaxError", e.what());
    }
    if (!doc.is_object() || !doc.contains("pipeline") ||
        !doc["pipeline"].is_array())
        fail("SyntaxError", "document must be an object with a 'pipeline' array");

    Workflow w;
    if (doc.contains("process") && doc["process"].is_string())
        w.process = doc["process"].get<std::string>();

    bool saw_result = false;
    for (const auto& entry : doc["pipeline"]) {
        if (!entry.is_object())
            fail("SyntaxError", "pipeline entries must be objects");

        if (entry.contains("result")) {
            saw_result = true;
            const auto& res = entry["result"];
            std::vector<std::string> tokens;
            if (res.is_array()) {
                for (const auto& e : res) {
                    if (!e.is_string())
                        fail("SyntaxError", "result entries must be strings");
                    tokens.push_back(e.get<std::string>());
                }
            } else if (res.is_string()) {
                std::string s = trim(res.get<std::string>());
                if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
                    // Accepted quirk: the quoted "[stepA[x], stepB[y]]" form.
                    tokens = split_bracketed_list(s.substr(1, s.size() - 2));
                } else {
                    tokens.push_back(s);
                }
            } else {
                fail("SyntaxError", "result must be a list or string");
            }
            for (const auto& t : tokens) w.result.push_back(parse_value_ref(t));
            continue;
        }

        Step step;
        if (!entry.contains("step") || !entry["step"].is_number_integer())
            fail("SyntaxError", "step entry missing integer 'step'");
        step.index = entry["step"].get<int>();
        if (!entry.contains("model") || !entry["model"].is_string())
            fail("SyntaxError", "step entry missing string 'model'");
        step.model = entry["model"].get<std::string>();

        if (entry.contains("input")) {
            if (!entry["input"].is_object())
                fail("SyntaxError", "step input must be an object");
            for (const auto& [slot, v] : entry["input"].items())
                step.inputs.emplace_back(slot, ref_from_json(v));
        }

        if (entry.contains("output")) {
            const auto& out = entry["output"];
            if (out.is_object()) {
                for (const auto& [slot, v] : out.items()) {
                    if (!v.is_string())
                        fail("SyntaxError", "declared outputs must be ref strings");
                    const std::string ref_text = v.get<std::string>();
                    step.declared_outputs.emplace_back(slot, ref_text);
                    ValueRef r = parse_value_ref(ref_text);
                    if (r.kind != ValueRef::Kind::Step || r.step != step.index ||
                        r.field != slot)
                        w.warnings.push_back(
                            "step " + std::to_string(step.index) +
                            ": declared output key '" + slot +
                            "' does not match reference '" + ref_text + "'");
                }
            } else if (out.is_array()) {
                // Key-less output form; normalize using the slot named in
                // the reference itself.
                for (const auto& v : out) {
                    if (!v.is_string())
                        fail("SyntaxError", "declared outputs must be ref strings");
                    const std::string ref_text = v.get<std::string>();
                    ValueRef r = parse_value_ref(ref_text);
                    if (r.kind != ValueRef::Kind::Step)
                        fail("SyntaxError",
                             "key-less output '" + ref_text + "' is not a step ref");
                    step.declared_outputs.emplace_back(r.field, ref_text);
                    w.warnings.push_back(
                        "step " + std::to_string(step.index) +
                        ": key-less output '" + ref_text + "' normalized to '" +
                        r.field + "'");
                }
            } else {
                fail("SyntaxError", "step output must be an object or a list");
            }
        }

        for (const auto& [key, v] : entry.items()) {
            if (key == "step" || key == "model" || key == "input" ||
                key == "output")
                continue;
            step.extras.emplace_back(key, v.dump());
        }
        w.steps.push_back(std::move(step));
    }

    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        if (w.steps[i].index != static_cast<int>(i) + 1)
            fail("NonConsecutiveSteps",
                 "step indices must be exactly 1.." +
                     std::to_string(w.steps.size()) + " in order; found " +
                     std::to_string(w.steps[i].index) + " at position " +
                     std::to_string(i + 1));
    }

    const int k = static_cast<int>(w.steps.size());
    for (const auto& step : w.steps) {
        for (const auto& [slot, ref] : step.inputs) {
            if (ref.kind == ValueRef::Kind::Step && ref.step >= step.index)
                fail("ForwardReference",
                     "step " + std::to_string(step.index) + " input '" + slot +
                         "' references step " + std::to_string(ref.step));
        }
    }

    if (!saw_result || w.result.empty())
        fail("EmptyResult", "workflow has no result references");
    for (const auto& ref : w.result) {
        if (ref.kind == ValueRef::Kind::Step && ref.step > k)
            fail("ForwardReference",
                 "result references nonexistent step " + std::to_string(ref.step));
    }
    return w;
}

std::string serialize_workflow(const Workflow& w) {
    ordered_json doc;
    doc["process"] = w.process;
    ordered_json pipeline = ordered_json::array();
    for (const auto& step : w.steps) {
        ordered_json s;
        s["step"] = step.index;
        s["model"] = step.model;
        ordered_json input = ordered_json::object();
        for (const auto& [slot, ref] : step.inputs) input[slot] = ref_to_json(ref);
        s["input"] = input;
        ordered_json output = ordered_json::object();
        for (const auto& [slot, ref_text] : step.declared_outputs)
            output[slot] = ref_text;
        s["output"] = output;
        for (const auto& [key, raw] : step.extras)
            s[key] = ordered_json::parse(raw);
        pipeline.push_back(std::move(s));
    }
    ordered_json result_entry;
    ordered_json result = ordered_json::array();
    for (const auto& ref : w.result) result.push_back(serialize_value_ref(ref));
    result_entry["result"] = result;
    pipeline.push_back(std::move(result_entry));
    doc["pipeline"] = pipeline;
    return doc.dump(2);
}

DepGraph workflow_graph(const Workflow& w) {
    DepGraph g;
    g.node_count = static_cast<int>(w.steps.size());
    std::set<std::pair<int, int>> edges;
    for (const auto& step : w.steps) {
        for (const auto& [slot, ref] : step.inputs) {
            (void)slot;
            if (ref.kind == ValueRef::Kind::Step)
                edges.insert({ref.step, step.index});
        }
    }
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

} // namespace lego
