#include "lego/critic.hpp"

#include "lego/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>

using ordered_json = nlohmann::ordered_json;

namespace lego {

namespace {

std::string casefold(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// First text literal bound to the step, preferring the conventional prompt
// slots over any other Str input.
const std::string* prompt_literal(const Step& step) {
    for (const char* slot : {"prompt", "style"})
        if (const ValueRef* ref = step.find_input(slot))
            if (ref->kind == ValueRef::Kind::LiteralText) return &ref->text;
    for (const auto& [slot, ref] : step.inputs)
        if (ref.kind == ValueRef::Kind::LiteralText) return &ref.text;
    return nullptr;
}

} // namespace

std::string MetaEdit::canonical_key() const {
    return verb + "\x1f" + casefold(target);
}

MetaEdit abstract_chain(const EditChain& chain, const Workflow& w,
                        const Registry& r) {
    MetaEdit edit;
    edit.editor_tool = chain.editor_tool;

    bool has_add_pred = false;
    const Step* res_step = nullptr;
    bool has_sos = false;
    for (int index : chain.support) {
        const Step* step = w.find_step(index);
        if (!step) continue;
        const ToolSpec* spec = r.find(step->model);
        if (!spec) continue;
        if (spec->canonical_name == "ADD-PRED") has_add_pred = true;
        if (spec->canonical_name == "RES" && !res_step) res_step = step;
        if (spec->canonical_name == "SOS") has_sos = true;
    }

    const std::string& tool = chain.editor_tool;
    if (tool == "INPAINT") edit.verb = "remove";
    else if (tool == "FILL") edit.verb = has_add_pred ? "add" : "fill";
    else if (tool == "RCM") edit.verb = "recolor";
    else if (tool == "STYLE") edit.verb = "restyle";
    else if (tool == "ENV") edit.verb = "re-environment";
    else if (tool == "POSE") edit.verb = "re-pose";
    else if (tool == "CBG") edit.verb = "change-background";
    else edit.verb = casefold(tool);

    // Nearest prompt: the editor's own, else the closest support step's.
    const Step* editor = w.find_step(chain.editor);
    if (editor)
        if (const std::string* text = prompt_literal(*editor)) edit.target = *text;
    if (edit.target.empty())
        for (auto it = chain.support.rbegin(); it != chain.support.rend(); ++it)
            if (const Step* step = w.find_step(*it))
                if (const std::string* text = prompt_literal(*step)) {
                    edit.target = *text;
                    break;
                }

    if (has_add_pred) {
        edit.region_provenance = "predicted placement";
    } else if (res_step) {
        const std::string* prompt = prompt_literal(*res_step);
        edit.region_provenance =
            "segmented by '" + (prompt ? *prompt : "") + "'";
    } else if (has_sos) {
        edit.region_provenance = "salient object";
    } else {
        edit.region_provenance = "whole image";
    }
    return edit;
}

TaskSpec TaskSpec::from_json(const std::string& document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const std::exception& e) {
        fail("SyntaxError", std::string("task spec: ") + e.what());
    }
    TaskSpec task;
    if (!doc.is_object() || !doc.contains("instruction") ||
        !doc.contains("required_edits"))
        fail("SyntaxError", "task spec needs 'instruction' and 'required_edits'");
    task.instruction = doc.at("instruction").get<std::string>();
    for (const auto& entry : doc.at("required_edits")) {
        MetaEdit edit;
        edit.verb = entry.at("verb").get<std::string>();
        edit.target = entry.at("target").get<std::string>();
        task.required_edits.push_back(std::move(edit));
    }
    return task;
}

Critique MockCritic::review(const std::vector<MetaEdit>& meta_edits,
                            const std::string& /*instruction*/) {
    // Multiset difference over canonical keys, in both directions.
    std::multiset<std::string> required;
    for (const auto& edit : task_.required_edits)
        required.insert(edit.canonical_key());

    Critique critique;
    for (std::size_t i = 0; i < meta_edits.size(); ++i) {
        const auto it = required.find(meta_edits[i].canonical_key());
        if (it != required.end())
            required.erase(it);
        else
            critique.remove_indices.push_back(static_cast<int>(i));
    }
    for (const auto& edit : task_.required_edits)
        if (required.count(edit.canonical_key())) {
            required.erase(required.find(edit.canonical_key()));
            critique.additions.push_back(edit);
        }
    return critique;
}

Critique judge(const std::vector<MetaEdit>& meta_edits,
               const std::string& instruction, Critic& critic) {
    Critique critique = critic.review(meta_edits, instruction);
    std::set<int> seen;
    for (int index : critique.remove_indices) {
        if (index < 0 || index >= static_cast<int>(meta_edits.size()))
            fail("MalformedCritique",
                 "remove index " + std::to_string(index) + " out of range");
        if (!seen.insert(index).second)
            fail("MalformedCritique",
                 "duplicate remove index " + std::to_string(index));
    }
    return critique;
}

RemoteCriticConfig RemoteCriticConfig::from_env() {
    RemoteCriticConfig config;
    if (const char* endpoint = std::getenv("LEGO_CRITIC_ENDPOINT"))
        config.endpoint = endpoint;
    if (const char* token = std::getenv("LEGO_CRITIC_TOKEN"))
        config.token = token;
    return config;
}

Critique remote_critic_call(const RemoteCriticConfig& config,
                            const std::vector<MetaEdit>& meta_edits,
                            const std::string& instruction) {
    if (config.endpoint.empty())
        fail("CriticUnavailable", "no critic endpoint configured");

    // Split scheme://host:port from the path.
    const std::size_t scheme = config.endpoint.find("://");
    const std::size_t path_start = config.endpoint.find(
        '/', scheme == std::string::npos ? 0 : scheme + 3);
    const std::string base = path_start == std::string::npos
                                 ? config.endpoint
                                 : config.endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos
                                 ? "/"
                                 : config.endpoint.substr(path_start);

    ordered_json request;
    request["instruction"] = instruction;
    request["meta_edits"] = ordered_json::array();
    for (const auto& edit : meta_edits)
        request["meta_edits"].push_back({{"verb", edit.verb},
                                         {"target", edit.target},
                                         {"region_provenance",
                                          edit.region_provenance},
                                         {"editor_tool", edit.editor_tool}});
    const std::string body = request.dump();

    httplib::Client client(base);
    client.set_connection_timeout(config.timeout_sec, 0);
    client.set_read_timeout(config.timeout_sec, 0);
    client.set_write_timeout(config.timeout_sec, 0);
    httplib::Headers headers;
    if (!config.token.empty())
        headers.emplace("Authorization", "Bearer " + config.token);

    httplib::Result response;
    for (int attempt = 0; attempt <= config.retries; ++attempt) {
        response = client.Post(path, headers, body, "application/json");
        if (response && response->status >= 200 && response->status < 300)
            break;
    }
    if (!response || response->status < 200 || response->status >= 300)
        fail("CriticUnavailable", "critic endpoint unreachable or failing");

    ordered_json doc = ordered_json::parse(response->body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        fail("MalformedCritique", "critic response is not a JSON object");
    if (!doc.contains("remove_indices") || !doc.at("remove_indices").is_array())
        fail("MalformedCritique", "missing or mistyped 'remove_indices'");
    if (!doc.contains("additions") || !doc.at("additions").is_array())
        fail("MalformedCritique", "missing or mistyped 'additions'");

    Critique critique;
    for (const auto& entry : doc.at("remove_indices")) {
        if (!entry.is_number_integer())
            fail("MalformedCritique", "remove index is not an integer");
        critique.remove_indices.push_back(entry.get<int>());
    }
    for (const auto& entry : doc.at("additions")) {
        if (!entry.is_object() || !entry.contains("verb") ||
            !entry.at("verb").is_string() || !entry.contains("target") ||
            !entry.at("target").is_string())
            fail("MalformedCritique", "addition needs string verb and target");
        MetaEdit edit;
        edit.verb = entry.at("verb").get<std::string>();
        edit.target = entry.at("target").get<std::string>();
        critique.additions.push_back(std::move(edit));
    }
    return critique;
}

} // namespace lego
