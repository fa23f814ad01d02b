#pragma once

#include "lego/raster.hpp"
#include "lego/registry.hpp"
#include "lego/workflow.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lego {

// Tool dispatch target. Implementations must be pure with respect to
// (tool, inputs, seed): identical arguments give identical outputs.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::map<std::string, Value> invoke(
        const ToolSpec& tool, const std::map<std::string, Value>& inputs,
        std::uint64_t seed) = 0;
};

struct TraceEntry {
    int step = 0;
    std::string tool;
    double duration_ms = 0.0;  // informational; excluded from determinism
    std::vector<std::pair<std::string, std::string>> outputs;  // slot -> summary
};

struct ExecutionResult {
    enum class Status { Ok, Fault };

    Status status = Status::Fault;
    int fault_step = 0;  // 0 = result materialization
    std::string fault_reason;
    std::vector<Value> results;  // aligned with workflow result refs
    std::vector<TraceEntry> trace;

    bool ok() const { return status == Status::Ok; }
    // Trace as JSON lines, one record per step; durations omitted so output
    // stays byte-stable.
    std::string trace_jsonl() const;
};

// Deterministic order: every edge (i, j) has i before j; among ready steps
// the lowest index runs first. Throws Error("CycleDetected") on cyclic input.
std::vector<int> topological_schedule(const DepGraph& g);

// Runs the workflow against the registry and backend. The four pure raster
// tools (INVERSE, COMPOSE, RESIZE, BBOX) execute in-engine; everything else
// goes through the backend. Never throws for workflow-level problems: those
// come back as Fault, which feeds the validity reward.
ExecutionResult execute_workflow(const Workflow& w, const Registry& r,
                                 Backend& backend,
                                 const std::map<std::string, Value>& init,
                                 std::uint64_t seed);

// Deterministic stand-in for the model tools, keyed by a hash of the tool
// name, the textual input summaries, and the seed.
class MockBackend final : public Backend {
public:
    std::map<std::string, Value> invoke(const ToolSpec& tool,
                                        const std::map<std::string, Value>& inputs,
                                        std::uint64_t seed) override;
};

} // namespace lego
