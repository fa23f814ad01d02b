#pragma once

#include "lego/registry.hpp"
#include "lego/workflow.hpp"

#include <map>
#include <set>
#include <utility>
#include <vector>

namespace lego {

// Depth of each step: longest path to a sink, so final consumers sit at
// depth 0 and their furthest producers at the maximum.
std::map<int, int> node_depths(const DepGraph& g);

// Steps grouped by depth, deepest layer first; indices ascending per layer.
std::vector<std::vector<int>> depth_layers(const Workflow& w);

// Similarity of two steps in [0, 1]: half for using the same tool (canonical
// names, so aliases agree), half for the fraction of identically-bound input
// slots over the union of bound slot names. Step references only count as
// identical when their producers are already matched to each other.
double node_similarity(const Step& a, const Step& b, const Registry* registry,
                       const std::set<std::pair<int, int>>& matched);

// Maximum-weight assignment of rows to columns. Returns one column per row
// (-1 for unassigned); among optimal assignments, picks the one whose column
// choices are lexicographically smallest row by row.
std::vector<int> hungarian_assign(const std::vector<std::vector<double>>& value);

struct MatchedPair {
    int g_step = 0;   // step index in the candidate workflow
    int gt_step = 0;  // step index in the reference workflow
    double similarity = 0.0;
};

struct MatchResult {
    std::vector<MatchedPair> pairs;  // sorted by g_step
    double reward = 0.0;
};

// Depth-layered matching: steps are compared layer by layer, producers before
// consumers, with pairs below the similarity threshold dropped after
// assignment. The reward blends match coverage and mean pair similarity.
MatchResult match_workflows(const Workflow& candidate, const Workflow& reference,
                            const Registry* registry,
                            double threshold = 0.6);

double similarity_reward(const Workflow& candidate, const Workflow& reference,
                         const Registry* registry, double threshold = 0.6);

} // namespace lego
