#include "lego/registry.hpp"

#include "lego/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <sstream>

using ordered_json = nlohmann::ordered_json;

namespace lego {

std::string to_string(ToolKind k) {
    switch (k) {
        case ToolKind::Predictive: return "predictive";
        case ToolKind::Editing: return "editing";
        case ToolKind::Auxiliary: return "auxiliary";
    }
    return "?";
}

namespace {

ToolKind kind_from_string(const std::string& s) {
    if (s == "predictive") return ToolKind::Predictive;
    if (s == "editing") return ToolKind::Editing;
    if (s == "auxiliary") return ToolKind::Auxiliary;
    fail("SyntaxError", "unknown tool kind '" + s + "'");
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return s;
}

std::vector<std::string> string_list(const ordered_json& v) {
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(e.get<std::string>());
    return out;
}

Constraint constraint_from_json(const ordered_json& j) {
    Constraint c;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "exactly_one_kind") {
        c.kind = Constraint::Kind::ExactlyOneKind;
        c.group_a = string_list(j.at("group_a"));
        c.group_b = string_list(j.at("group_b"));
    } else if (kind == "all_or_none_null") {
        c.kind = Constraint::Kind::AllOrNoneNull;
        c.slots = string_list(j.at("slots"));
    } else if (kind == "requires_non_null") {
        c.kind = Constraint::Kind::RequiresNonNull;
        c.slot = j.at("slot").get<std::string>();
    } else if (kind == "prompt_prefix") {
        c.kind = Constraint::Kind::PromptPrefix;
        c.slot = j.at("slot").get<std::string>();
        c.prefix = j.at("prefix").get<std::string>();
    } else if (kind == "paired_nullability") {
        c.kind = Constraint::Kind::PairedNullability;
        c.slots = string_list(j.at("slots"));
    } else {
        fail("SyntaxError", "unknown constraint kind '" + kind + "'");
    }
    return c;
}

std::vector<std::string> constraint_slots(const Constraint& c) {
    std::vector<std::string> names;
    names.insert(names.end(), c.group_a.begin(), c.group_a.end());
    names.insert(names.end(), c.group_b.begin(), c.group_b.end());
    names.insert(names.end(), c.slots.begin(), c.slots.end());
    if (!c.slot.empty()) names.push_back(c.slot);
    return names;
}

void validate_spec(const ToolSpec& spec) {
    if (spec.canonical_name.empty())
        fail("SyntaxError", "tool with empty canonical name");
    for (const auto& c : spec.constraints) {
        for (const auto& s : constraint_slots(c)) {
            if (!spec.find_input(s))
                fail("DanglingConstraintSlot",
                     spec.canonical_name + ": constraint names unknown slot '" +
                         s + "'");
        }
    }
}

bool any_bound(const BindingMap& bound, const std::vector<std::string>& slots) {
    for (const auto& s : slots) {
        auto it = bound.find(s);
        if (it != bound.end() && !it->second.null) return true;
    }
    return false;
}

} // namespace

const SlotSpec* ToolSpec::find_input(const std::string& name) const {
    for (const auto& s : inputs)
        if (s.name == name) return &s;
    return nullptr;
}

const SlotSpec* ToolSpec::find_output(const std::string& name) const {
    for (const auto& s : outputs)
        if (s.name == name) return &s;
    return nullptr;
}

void Registry::index_tool(std::size_t i) {
    const ToolSpec& spec = tools_[i];
    auto claim = [&](const std::string& name) {
        auto [it, inserted] = by_name_.emplace(name, i);
        if (!inserted && it->second != i)
            fail("DuplicateTool", "name '" + name + "' already registered");
    };
    claim(spec.canonical_name);
    for (const auto& a : spec.aliases) claim(a);
}

Registry Registry::from_document(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        fail("SyntaxError", e.what());
    }
    if (!doc.is_array()) fail("SyntaxError", "registry document must be an array");

    Registry r;
    for (const auto& j : doc) {
        ToolSpec spec;
        try {
            spec.canonical_name = j.at("name").get<std::string>();
            if (j.contains("aliases")) spec.aliases = string_list(j["aliases"]);
            spec.kind = kind_from_string(j.at("kind").get<std::string>());
            for (const auto& dir : {"inputs", "outputs"}) {
                for (const auto& s : j.at(dir)) {
                    SlotSpec slot;
                    slot.name = s.at("name").get<std::string>();
                    slot.type =
                        semantic_type_from_string(s.at("type").get<std::string>());
                    slot.nullable = s.value("nullable", false);
                    (std::string(dir) == "inputs" ? spec.inputs : spec.outputs)
                        .push_back(slot);
                }
            }
            if (j.contains("constraints"))
                for (const auto& c : j["constraints"])
                    spec.constraints.push_back(constraint_from_json(c));
            spec.description = j.value("description", "");
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            fail("SyntaxError", e.what());
        }
        validate_spec(spec);
        r.tools_.push_back(std::move(spec));
        r.index_tool(r.tools_.size() - 1);
    }
    return r;
}

Registry Registry::bundled_default() {
    return from_document(default_registry_json());
}

Registry Registry::with_tool(ToolSpec spec) const {
    validate_spec(spec);
    Registry next = *this;
    next.tools_.push_back(std::move(spec));
    next.index_tool(next.tools_.size() - 1);
    return next;
}

const ToolSpec* Registry::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &tools_[it->second];
}

const ToolSpec& Registry::lookup(const std::string& name) const {
    const ToolSpec* spec = find(name);
    if (!spec) fail("UnknownTool", "no tool named '" + name + "'");
    return *spec;
}

std::vector<ConstraintViolation> check_constraints(const ToolSpec& spec,
                                                   const BindingMap& bound) {
    std::vector<ConstraintViolation> out;
    auto is_null = [&](const std::string& slot) {
        auto it = bound.find(slot);
        return it == bound.end() || it->second.null;
    };

    for (const auto& c : spec.constraints) {
        switch (c.kind) {
            case Constraint::Kind::ExactlyOneKind: {
                const bool a = any_bound(bound, c.group_a);
                const bool b = any_bound(bound, c.group_b);
                if (a == b)
                    out.push_back(
                        {c.kind, a ? "both input kinds are bound"
                                   : "no input kind is bound"});
                break;
            }
            case Constraint::Kind::AllOrNoneNull:
            case Constraint::Kind::PairedNullability: {
                bool saw_null = false, saw_bound = false;
                for (const auto& s : c.slots)
                    (is_null(s) ? saw_null : saw_bound) = true;
                if (saw_null && saw_bound)
                    out.push_back({c.kind,
                                   "slots must be all null or all non-null"});
                break;
            }
            case Constraint::Kind::RequiresNonNull:
                if (is_null(c.slot))
                    out.push_back({c.kind, "slot '" + c.slot + "' must not be null"});
                break;
            case Constraint::Kind::PromptPrefix: {
                auto it = bound.find(c.slot);
                if (it == bound.end() || it->second.null) break;
                if (!it->second.text) break;  // not statically known
                const std::string text = lower(*it->second.text);
                if (text.rfind(lower(c.prefix), 0) != 0)
                    out.push_back({c.kind, "slot '" + c.slot +
                                               "' must start with '" + c.prefix +
                                               "'"});
                break;
            }
        }
    }
    return out;
}

std::vector<ConstraintViolation> check_constraints(
    const ToolSpec& spec,
    const std::vector<std::pair<std::string, ValueRef>>& bound) {
    BindingMap map;
    for (const auto& [slot, ref] : bound) {
        Binding b;
        b.null = ref.is_null();
        if (ref.kind == ValueRef::Kind::LiteralText) b.text = ref.text;
        map[slot] = b;
    }
    return check_constraints(spec, map);
}

std::string describe_constraint(const Constraint& c) {
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + v[i];
        return s;
    };
    std::ostringstream os;
    switch (c.kind) {
        case Constraint::Kind::ExactlyOneKind:
            os << "Only one kind of input may be given per step: either {"
               << join(c.group_a) << "} or {" << join(c.group_b)
               << "}, the other kind must be null.";
            break;
        case Constraint::Kind::AllOrNoneNull:
            os << "The inputs {" << join(c.slots)
               << "} must be all null or all non-null.";
            break;
        case Constraint::Kind::RequiresNonNull:
            os << "The input " << c.slot << " must not be null.";
            break;
        case Constraint::Kind::PromptPrefix:
            os << "The input " << c.slot << " must start with '" << c.prefix
               << "'.";
            break;
        case Constraint::Kind::PairedNullability:
            os << "The inputs {" << join(c.slots)
               << "} must be the same null or the same valid.";
            break;
    }
    return os.str();
}

} // namespace lego
