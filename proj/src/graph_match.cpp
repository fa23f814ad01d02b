#include "lego/graph_match.hpp"

#include "lego/errors.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace lego {

std::map<int, int> node_depths(const DepGraph& g) {
    std::map<int, std::vector<int>> out;
    std::set<int> nodes;
    for (int i = 1; i <= g.node_count; ++i) nodes.insert(i);
    for (const auto& [from, to] : g.edges) {
        nodes.insert(from);
        nodes.insert(to);
        out[from].push_back(to);
    }
    std::map<int, int> depth;
    // Edges always point from lower to higher index, so a reverse index scan
    // sees every consumer before its producers.
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
        int d = 0;
        for (int consumer : out[*it]) d = std::max(d, depth.at(consumer) + 1);
        depth[*it] = d;
    }
    return depth;
}

std::vector<std::vector<int>> depth_layers(const Workflow& w) {
    const std::map<int, int> depth = node_depths(workflow_graph(w));
    int max_depth = 0;
    for (const auto& [node, d] : depth) max_depth = std::max(max_depth, d);
    std::vector<std::vector<int>> layers(static_cast<std::size_t>(max_depth) + 1);
    for (const auto& [node, d] : depth)
        layers[static_cast<std::size_t>(max_depth - d)].push_back(node);
    for (auto& layer : layers) std::sort(layer.begin(), layer.end());
    if (w.steps.empty()) layers.clear();
    return layers;
}

namespace {

std::string canonical_tool(const std::string& model, const Registry* registry) {
    if (registry)
        if (const ToolSpec* spec = registry->find(model))
            return spec->canonical_name;
    return model;
}

std::string normalized_text(const std::string& s) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

bool refs_identical(const ValueRef& a, const ValueRef& b,
                    const std::set<std::pair<int, int>>& matched) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ValueRef::Kind::Null: return true;
        case ValueRef::Kind::LiteralText:
            return normalized_text(a.text) == normalized_text(b.text);
        case ValueRef::Kind::LiteralNumber:
            return std::fabs(a.number - b.number) <= 1e-9;
        case ValueRef::Kind::Init: return a.field == b.field;
        case ValueRef::Kind::Step:
            return a.field == b.field && matched.count({a.step, b.step}) > 0;
    }
    return false;
}

} // namespace

double node_similarity(const Step& a, const Step& b, const Registry* registry,
                       const std::set<std::pair<int, int>>& matched) {
    const double tool_term =
        canonical_tool(a.model, registry) == canonical_tool(b.model, registry)
            ? 1.0
            : 0.0;

    std::set<std::string> slots;
    for (const auto& [slot, ref] : a.inputs) slots.insert(slot);
    for (const auto& [slot, ref] : b.inputs) slots.insert(slot);

    double slot_term = 1.0;  // vacuously identical when neither binds anything
    if (!slots.empty()) {
        std::size_t identical = 0;
        for (const auto& slot : slots) {
            const ValueRef* ra = a.find_input(slot);
            const ValueRef* rb = b.find_input(slot);
            if (ra && rb && refs_identical(*ra, *rb, matched)) ++identical;
        }
        slot_term = static_cast<double>(identical) /
                    static_cast<double>(slots.size());
    }
    return 0.5 * tool_term + 0.5 * slot_term;
}

std::vector<int> hungarian_assign(const std::vector<std::vector<double>>& value) {
    const int n = static_cast<int>(value.size());
    if (n == 0) return {};
    const int m = static_cast<int>(value.front().size());
    for (const auto& row : value)
        if (static_cast<int>(row.size()) != m)
            fail("BadMatrix", "assignment matrix is ragged");
    if (m == 0) return std::vector<int>(static_cast<std::size_t>(n), -1);

    // Pad to a square so "unassigned" becomes a zero-value padding column or
    // row, then solve exactly over column subsets; sizes here are workflow
    // layers, which are tiny.
    const int k = std::max(n, m);
    if (k > 20) fail("BadMatrix", "assignment matrix too large");
    auto cell = [&](int r, int c) {
        return r < n && c < m ? value[static_cast<std::size_t>(r)]
                                     [static_cast<std::size_t>(c)]
                              : 0.0;
    };

    // best[S] = best total for the remaining rows (row index = |S|) using the
    // columns outside S.
    const std::uint32_t full = (k == 32 ? 0xffffffffu : (1u << k) - 1u);
    std::vector<double> best(static_cast<std::size_t>(full) + 1, 0.0);
    std::vector<std::uint32_t> by_count_order(best.size());
    for (std::uint32_t s = 0; s <= full; ++s) by_count_order[s] = s;
    std::sort(by_count_order.begin(), by_count_order.end(),
              [](std::uint32_t a, std::uint32_t b) {
                  return std::popcount(a) > std::popcount(b);
              });
    for (std::uint32_t s : by_count_order) {
        const int r = std::popcount(s);
        if (r >= k) continue;
        double v = -1.0;
        for (int c = 0; c < k; ++c)
            if (!(s & (1u << c)))
                v = std::max(v, cell(r, c) + best[s | (1u << c)]);
        best[s] = v;
    }

    // Fix rows in order, preferring the lowest real column (then padding)
    // that still permits an optimal completion.
    constexpr double kTol = 1e-9;
    std::vector<int> assignment(static_cast<std::size_t>(n), -1);
    std::uint32_t used = 0;
    for (int r = 0; r < k; ++r) {
        std::vector<int> order;
        for (int c = 0; c < m && c < k; ++c) order.push_back(c);
        for (int c = m; c < k; ++c) order.push_back(c);
        for (int c : order) {
            if (used & (1u << c)) continue;
            const std::uint32_t next = used | (1u << c);
            const double rest = r + 1 < k ? best[next] : 0.0;
            if (cell(r, c) + rest + kTol >= best[used]) {
                if (r < n) assignment[static_cast<std::size_t>(r)] = c < m ? c : -1;
                used = next;
                break;
            }
        }
    }
    return assignment;
}

MatchResult match_workflows(const Workflow& candidate, const Workflow& reference,
                            const Registry* registry, double threshold) {
    MatchResult result;
    // Group steps by depth on each side; only same-depth steps may pair up.
    std::map<int, std::vector<int>> g_by_depth, gt_by_depth;
    for (const auto& [node, d] : node_depths(workflow_graph(candidate)))
        g_by_depth[d].push_back(node);
    for (const auto& [node, d] : node_depths(workflow_graph(reference)))
        gt_by_depth[d].push_back(node);
    if (candidate.steps.empty()) g_by_depth.clear();
    if (reference.steps.empty()) gt_by_depth.clear();

    int max_depth = -1;
    for (const auto& [d, nodes] : g_by_depth) max_depth = std::max(max_depth, d);
    for (const auto& [d, nodes] : gt_by_depth) max_depth = std::max(max_depth, d);

    std::set<std::pair<int, int>> matched;
    // Producers sit at higher depth and must be matched before their
    // consumers, so their step references can be compared.
    for (int d = max_depth; d >= 0; --d) {
        const auto g_it = g_by_depth.find(d);
        const auto gt_it = gt_by_depth.find(d);
        if (g_it == g_by_depth.end() || gt_it == gt_by_depth.end()) continue;
        const auto& g_layer = g_it->second;
        const auto& gt_layer = gt_it->second;

        std::vector<std::vector<double>> value(g_layer.size());
        for (std::size_t i = 0; i < g_layer.size(); ++i) {
            value[i].resize(gt_layer.size());
            for (std::size_t j = 0; j < gt_layer.size(); ++j)
                value[i][j] = node_similarity(*candidate.find_step(g_layer[i]),
                                              *reference.find_step(gt_layer[j]),
                                              registry, matched);
        }
        const std::vector<int> assignment = hungarian_assign(value);
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            const int j = assignment[i];
            if (j < 0) continue;
            const double sim = value[i][static_cast<std::size_t>(j)];
            if (sim < threshold) continue;
            matched.insert({g_layer[i], gt_layer[static_cast<std::size_t>(j)]});
            result.pairs.push_back(
                {g_layer[i], gt_layer[static_cast<std::size_t>(j)], sim});
        }
    }

    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const MatchedPair& a, const MatchedPair& b) {
                  return a.g_step < b.g_step;
              });
    if (!result.pairs.empty()) {
        double mean = 0.0;
        for (const auto& pair : result.pairs) mean += pair.similarity;
        mean /= static_cast<double>(result.pairs.size());
        const double denom = static_cast<double>(
            std::max(candidate.steps.size(), reference.steps.size()));
        result.reward =
            0.5 * static_cast<double>(result.pairs.size()) / denom + 0.5 * mean;
    }
    return result;
}

double similarity_reward(const Workflow& candidate, const Workflow& reference,
                         const Registry* registry, double threshold) {
    return match_workflows(candidate, reference, registry, threshold).reward;
}

} // namespace lego
