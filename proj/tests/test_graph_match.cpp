#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lego/graph_match.hpp"

#include "support.hpp"

#include <algorithm>
#include <numeric>
#include <random>

using namespace lego;

namespace {

const Registry& registry() {
    static const Registry r = Registry::bundled_default();
    return r;
}

// Exhaustive-permutation maximum of a value matrix: the oracle for the
// assignment solver.
double brute_force_best(const std::vector<std::vector<double>>& value) {
    const std::size_t n = value.size();
    const std::size_t m = value.front().size();
    std::vector<int> cols(std::max(n, m));
    std::iota(cols.begin(), cols.end(), 0);
    double best = -1e18;
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (static_cast<std::size_t>(cols[i]) < m)
                total += value[i][static_cast<std::size_t>(cols[i])];
        best = std::max(best, total);
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
}

} // namespace

TEST_CASE("node depths of the fixtures") {
    const std::map<int, int> d2 =
        node_depths(workflow_graph(support::load_fixture("example2.json")));
    CHECK(d2 == std::map<int, int>{{1, 2}, {2, 1}, {3, 0}});

    const std::map<int, int> d3 =
        node_depths(workflow_graph(support::load_fixture("example3.json")));
    CHECK(d3 == std::map<int, int>{{1, 3}, {2, 1}, {3, 2}, {4, 1}, {5, 0}});

    DepGraph single{1, {}};
    CHECK(node_depths(single) == std::map<int, int>{{1, 0}});
}

TEST_CASE("node similarity arithmetic") {
    Step a;
    a.index = 1;
    a.model = "RES";
    a.inputs = {{"image", ValueRef::init("image")},
                {"prompt", ValueRef::literal(std::string("dog"))}};
    Step b = a;
    CHECK(node_similarity(a, b, &registry(), {}) == doctest::Approx(1.0));

    // Case and whitespace in text params are normalized away.
    b.inputs[1].second = ValueRef::literal(std::string("  DOG "));
    CHECK(node_similarity(a, b, &registry(), {}) == doctest::Approx(1.0));

    b.inputs[1].second = ValueRef::literal(std::string("cat"));
    CHECK(node_similarity(a, b, &registry(), {}) == doctest::Approx(0.75));

    // Different tool, identical parameters.
    Step c = a;
    c.model = "SOS";
    c.inputs = a.inputs;
    CHECK(node_similarity(a, c, &registry(), {}) == doctest::Approx(0.5));

    // Aliases compare as the same tool.
    Step d1, d2;
    d1.model = "FILL";
    d2.model = "FLUX-FILL";
    CHECK(node_similarity(d1, d2, &registry(), {}) == doctest::Approx(1.0));

    // Step refs match only through already-matched producers.
    Step e1, e2;
    e1.model = e2.model = "FASTINPAINT";
    e1.inputs = {{"image", ValueRef::init("image")},
                 {"mask", ValueRef::step_ref(1, "mask")}};
    e2.inputs = {{"image", ValueRef::init("image")},
                 {"mask", ValueRef::step_ref(2, "mask")}};
    CHECK(node_similarity(e1, e2, &registry(), {}) == doctest::Approx(0.75));
    CHECK(node_similarity(e1, e2, &registry(), {{1, 2}}) ==
          doctest::Approx(1.0));
}

TEST_CASE("assignment solver basics") {
    CHECK(hungarian_assign({{0.9, 0.1}, {0.2, 0.8}}) ==
          std::vector<int>{0, 1});
    CHECK(hungarian_assign({{0.3}}) == std::vector<int>{0});
    // Ties break toward the lexicographically smallest pair list.
    CHECK(hungarian_assign({{1.0, 1.0}, {1.0, 1.0}}) ==
          std::vector<int>{0, 1});
    // Rectangular: extra rows stay unassigned.
    const std::vector<int> wide = hungarian_assign({{0.1, 0.9, 0.5}});
    CHECK(wide == std::vector<int>{1});
    const std::vector<int> tall = hungarian_assign({{0.2}, {0.9}});
    CHECK(tall == std::vector<int>{-1, 0});
}

TEST_CASE("assignment solver matches the brute-force oracle") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        const std::size_t m = 1 + rng() % 6;
        std::vector<std::vector<double>> value(n, std::vector<double>(m));
        for (auto& row : value)
            for (double& cell : row)
                cell = static_cast<double>(rng() % 1000) / 1000.0;

        const std::vector<int> assignment = hungarian_assign(value);
        double total = 0.0;
        std::vector<bool> used(m, false);
        for (std::size_t i = 0; i < n; ++i) {
            const int c = assignment[i];
            if (c < 0) continue;
            CHECK(!used[static_cast<std::size_t>(c)]);
            used[static_cast<std::size_t>(c)] = true;
            total += value[i][static_cast<std::size_t>(c)];
        }
        CHECK(total == doctest::Approx(brute_force_best(value)).epsilon(1e-12));
    }
}

TEST_CASE("fixture similarity scores") {
    const Workflow e2 = support::load_fixture("example2.json");
    const MatchResult self = match_workflows(e2, e2, &registry());
    REQUIRE(self.pairs.size() == 3);
    for (const auto& pair : self.pairs) {
        CHECK(pair.g_step == pair.gt_step);
        CHECK(pair.similarity == doctest::Approx(1.0));
    }
    CHECK(self.reward == doctest::Approx(1.0));

    // One changed prompt: the RES pair drops to 0.75 but survives the
    // threshold.
    Workflow cat = e2;
    for (auto& [slot, ref] : cat.steps[0].inputs)
        if (slot == "prompt") ref = ValueRef::literal(std::string("cat"));
    const MatchResult changed = match_workflows(cat, e2, &registry());
    REQUIRE(changed.pairs.size() == 3);
    CHECK(changed.pairs[0].similarity == doctest::Approx(0.75));

    const Workflow g = support::load_fixture("partial_match_g.json");
    const Workflow gt = support::load_fixture("partial_match_gt.json");
    CHECK(similarity_reward(g, gt, &registry()) ==
          doctest::Approx(0.783333).epsilon(1e-6));

    // Disjoint tools and parameters: nothing clears the threshold.
    Workflow env;
    env.process = "env";
    Step s;
    s.index = 1;
    s.model = "ENV";
    s.inputs = {{"image", ValueRef::init("image")},
                {"prompt", ValueRef::literal(std::string("rain"))}};
    env.steps.push_back(s);
    env.result = {ValueRef::step_ref(1, "image")};
    Workflow sos;
    sos.process = "sos";
    Step s2;
    s2.index = 1;
    s2.model = "SOS";
    s2.inputs = {{"image", ValueRef::step_ref(1, "image")}};
    s2.inputs = {{"image", ValueRef::init("other")}};
    sos.steps.push_back(s2);
    sos.result = {ValueRef::step_ref(1, "image")};
    CHECK(similarity_reward(env, sos, &registry()) == doctest::Approx(0.0));
}

TEST_CASE("reward range and identity over random pairs") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 500; ++trial) {
        const Workflow a = support::random_workflow(rng);
        const Workflow b = support::random_workflow(rng);
        const double r = similarity_reward(a, b, &registry());
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        CHECK(similarity_reward(a, a, &registry()) == doctest::Approx(1.0));
        // The coverage term and pair count are order-independent.
        const MatchResult ab = match_workflows(a, b, &registry());
        const MatchResult ba = match_workflows(b, a, &registry());
        CHECK(ab.pairs.size() == ba.pairs.size());
    }
}

TEST_CASE("raising the threshold never grows the match set") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 100; ++trial) {
        const Workflow a = support::random_workflow(rng);
        const Workflow b = support::random_workflow(rng);
        std::size_t previous = SIZE_MAX;
        for (double threshold : {0.0, 0.3, 0.6, 0.9}) {
            const std::size_t count =
                match_workflows(a, b, &registry(), threshold).pairs.size();
            CHECK(count <= previous);
            previous = count;
        }
    }
}
