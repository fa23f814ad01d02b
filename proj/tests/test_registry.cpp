#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lego/errors.hpp"
#include "lego/registry.hpp"

#include <algorithm>
#include <set>

using namespace lego;

TEST_CASE("bundled default registry") {
    const Registry r = Registry::bundled_default();
    CHECK(r.size() == 16);
    int predictive = 0;
    for (const auto& tool : r.tools())
        if (tool.kind == ToolKind::Predictive) ++predictive;
    CHECK(predictive == 6);

    for (const char* name :
         {"RES", "SOS", "ADD-PRED", "CAP-PRED", "INVERSE", "BBOX", "FILL",
          "FASTINPAINT", "INPAINT", "RCM", "STYLE", "ENV", "POSE", "COMPOSE",
          "RESIZE", "CBG"})
        CHECK(r.find(name) != nullptr);
}

TEST_CASE("alias resolution") {
    const Registry r = Registry::bundled_default();
    CHECK(r.lookup("FLUX-FILL").canonical_name == "FILL");
    CHECK(r.lookup("CMI-PRED").canonical_name == "CAP-PRED");
    for (const char* alias : {"FLUX-INPAINT", "FLUX-RCM", "FLUX-STYLE",
                              "FLUX-ENV", "FLUX-POSE", "FLUX-CBG"}) {
        const ToolSpec& spec = r.lookup(alias);
        CHECK(std::find(spec.aliases.begin(), spec.aliases.end(), alias) !=
              spec.aliases.end());
    }
    CHECK(r.find("RRF") == nullptr);
    CHECK_THROWS_AS(r.lookup("RRF"), Error);
}

TEST_CASE("auxiliary tools do not form chains") {
    const Registry r = Registry::bundled_default();
    const std::set<std::string> chain_forming = {"FILL", "INPAINT", "RCM",
                                                 "STYLE", "ENV",     "POSE",
                                                 "CBG"};
    for (const auto& tool : r.tools())
        CHECK(r.is_chain_forming(tool) ==
              (chain_forming.count(tool.canonical_name) > 0));
}

TEST_CASE("registration is value-semantic") {
    const Registry base = Registry::bundled_default();
    ToolSpec rrf;
    rrf.canonical_name = "RRF";
    rrf.kind = ToolKind::Editing;
    rrf.inputs = {{"image", SemanticType::Image, false}};
    rrf.outputs = {{"image", SemanticType::Image}};
    rrf.description = "Remove window reflections from the image.";

    const Registry extended = base.with_tool(rrf);
    CHECK(extended.size() == 17);
    CHECK(extended.lookup("RRF").kind == ToolKind::Editing);
    CHECK(base.size() == 16);
    CHECK(base.find("RRF") == nullptr);

    // Collisions on canonical name or alias are rejected.
    CHECK_THROWS_AS(base.with_tool(base.lookup("FILL")), Error);
    ToolSpec alias_clash = rrf;
    alias_clash.canonical_name = "RRF2";
    alias_clash.aliases = {"FLUX-FILL"};
    CHECK_THROWS_AS(base.with_tool(alias_clash), Error);

    // A sink tool with no outputs is fine.
    ToolSpec sink = rrf;
    sink.canonical_name = "SINK";
    sink.outputs.clear();
    CHECK(base.with_tool(sink).size() == 17);
}

TEST_CASE("registry document errors") {
    CHECK_THROWS_AS(Registry::from_document("]["), Error);

    const char* dup = R"([
      {"name": "A", "aliases": ["X"], "kind": "editing",
       "inputs": [], "outputs": [], "constraints": [], "description": ""},
      {"name": "B", "aliases": ["X"], "kind": "editing",
       "inputs": [], "outputs": [], "constraints": [], "description": ""}
    ])";
    try {
        Registry::from_document(dup);
        FAIL("expected DuplicateTool");
    } catch (const Error& e) {
        CHECK(e.code() == "DuplicateTool");
    }

    const char* dangling = R"([
      {"name": "A", "aliases": [], "kind": "editing",
       "inputs": [{"name": "image", "type": "Image", "nullable": false}],
       "outputs": [], "constraints": [{"kind": "requires_non_null", "slot": "masq"}],
       "description": ""}
    ])";
    try {
        Registry::from_document(dangling);
        FAIL("expected DanglingConstraintSlot");
    } catch (const Error& e) {
        CHECK(e.code() == "DanglingConstraintSlot");
    }
}

namespace {

// Evaluates the constraint predicates directly from a null/non-null pattern,
// independent of check_constraints' implementation.
bool pattern_ok(const Constraint& c,
                const std::map<std::string, bool>& non_null) {
    auto bound = [&](const std::string& slot) {
        auto it = non_null.find(slot);
        return it != non_null.end() && it->second;
    };
    switch (c.kind) {
        case Constraint::Kind::ExactlyOneKind: {
            bool a = false, b = false;
            for (const auto& s : c.group_a) a = a || bound(s);
            for (const auto& s : c.group_b) b = b || bound(s);
            return a != b;
        }
        case Constraint::Kind::AllOrNoneNull:
        case Constraint::Kind::PairedNullability: {
            bool any = false, all = true;
            for (const auto& s : c.slots) {
                any = any || bound(s);
                all = all && bound(s);
            }
            return !any || all;
        }
        case Constraint::Kind::RequiresNonNull: return bound(c.slot);
        case Constraint::Kind::PromptPrefix: return true;  // text-dependent
    }
    return true;
}

} // namespace

TEST_CASE("constraint soundness over all nullability patterns") {
    const Registry r = Registry::bundled_default();
    for (const auto& tool : r.tools()) {
        const std::size_t n = tool.inputs.size();
        if (n > 6) continue;
        for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
            BindingMap bindings;
            std::map<std::string, bool> non_null;
            for (std::size_t i = 0; i < n; ++i) {
                const bool set = (bits >> i) & 1;
                non_null[tool.inputs[i].name] = set;
                Binding b;
                b.null = !set;
                bindings[tool.inputs[i].name] = b;
            }
            const auto violations = check_constraints(tool, bindings);
            std::multiset<Constraint::Kind> flagged, expected;
            for (const auto& v : violations) flagged.insert(v.kind);
            for (const auto& c : tool.constraints) {
                if (c.kind == Constraint::Kind::PromptPrefix) continue;
                if (!pattern_ok(c, non_null)) expected.insert(c.kind);
            }
            INFO(tool.canonical_name, " bits=", bits);
            CHECK(flagged == expected);
        }
    }
}

TEST_CASE("specific constraint verdicts from the model library") {
    const Registry r = Registry::bundled_default();
    const ToolSpec& inverse = r.lookup("INVERSE");

    auto bind = [](std::initializer_list<std::pair<const char*, bool>> slots) {
        BindingMap map;
        for (const auto& [name, set] : slots) {
            Binding b;
            b.null = !set;
            map[name] = b;
        }
        return map;
    };

    CHECK(check_constraints(inverse, bind({{"mask1", true},
                                           {"mask2", true},
                                           {"image1", false},
                                           {"image2", false}}))
              .empty());
    CHECK(!check_constraints(inverse, bind({{"mask2", true}, {"image2", true}}))
               .empty());
    // mask1 null means "full mask": masks side counts as active via mask2.
    CHECK(check_constraints(inverse, bind({{"mask2", true}})).empty());
    // images must be both null or both non-null
    CHECK(!check_constraints(inverse, bind({{"image1", true}})).empty());

    const ToolSpec& cap = r.lookup("CAP-PRED");
    CHECK(!check_constraints(cap, bind({{"image", true}, {"left_ratio", true}}))
               .empty());
    CHECK(check_constraints(cap, bind({{"image", true},
                                       {"left_ratio", true},
                                       {"right_ratio", true},
                                       {"top_ratio", true},
                                       {"bottom_ratio", true}}))
              .empty());

    const ToolSpec& fill = r.lookup("FILL");
    auto fill_null_mask = bind({{"image", true}, {"prompt", true}});
    CHECK(!check_constraints(fill, fill_null_mask).empty());

    // CBG prompt prefix, case-insensitive, only when text is known.
    const ToolSpec& cbg = r.lookup("CBG");
    BindingMap cbg_bind = bind({{"image", true}, {"mask", true}});
    Binding prompt;
    prompt.null = false;
    prompt.text = "Change the background to a beach";
    cbg_bind["prompt"] = prompt;
    CHECK(check_constraints(cbg, cbg_bind).empty());
    prompt.text = "make it a beach";
    cbg_bind["prompt"] = prompt;
    CHECK(!check_constraints(cbg, cbg_bind).empty());
    prompt.text.reset();  // unknown text: statically unverifiable, no verdict
    cbg_bind["prompt"] = prompt;
    CHECK(check_constraints(cbg, cbg_bind).empty());
}

TEST_CASE("constraint prose covers every kind") {
    const Registry r = Registry::bundled_default();
    for (const auto& tool : r.tools())
        for (const auto& c : tool.constraints)
            CHECK(!describe_constraint(c).empty());
}
