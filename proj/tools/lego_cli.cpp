#include "lego/critic.hpp"
#include "lego/errors.hpp"
#include "lego/executor.hpp"
#include "lego/graph_match.hpp"
#include "lego/netpbm.hpp"
#include "lego/prompt.hpp"
#include "lego/registry.hpp"
#include "lego/rewards.hpp"
#include "lego/toy_train.hpp"
#include "lego/validator.hpp"
#include "lego/workflow.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) lego::fail("IoError", "cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

lego::Registry load_registry(const std::string& path) {
    if (path.empty()) return lego::Registry::bundled_default();
    return lego::Registry::from_document(read_text_file(path));
}

int cmd_validate(const std::string& flow, const std::string& registry_path) {
    const lego::Registry registry = load_registry(registry_path);
    const lego::Workflow w = lego::parse_workflow(read_text_file(flow));
    const lego::ValidationReport report = lego::validate_workflow(w, registry);
    std::cout << report.to_json() << "\n";
    return report.executable ? 0 : 1;
}

int cmd_run(const std::string& flow, const std::string& image_path,
            const std::string& registry_path, const std::string& out_dir,
            std::uint64_t seed) {
    const lego::Registry registry = load_registry(registry_path);
    const lego::Workflow w = lego::parse_workflow(read_text_file(flow));
    const lego::ValidationReport report = lego::validate_workflow(w, registry);
    if (!report.executable) {
        std::cerr << report.to_json() << "\n";
        return 1;
    }

    std::map<std::string, lego::Value> init;
    init["image"] = lego::Value::img(lego::read_ppm_file(image_path));

    lego::MockBackend backend;
    const lego::ExecutionResult result =
        lego::execute_workflow(w, registry, backend, init, seed);
    if (!result.ok()) {
        std::cerr << "fault at step " << result.fault_step << ": "
                  << result.fault_reason << "\n";
        return 1;
    }

    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < result.results.size(); ++i) {
        const lego::Value& value = result.results[i];
        const std::string stem =
            (fs::path(out_dir) / ("result_" + std::to_string(i + 1))).string();
        if (const lego::ImageBuf* img = value.image())
            lego::write_ppm_file(stem + ".ppm", *img);
        else if (const lego::MaskBuf* mask = value.mask())
            lego::write_pgm_file(stem + ".pgm", *mask);
        else {
            std::ofstream out(stem + ".txt", std::ios::binary);
            out << value.summary() << "\n";
        }
    }
    std::ofstream trace((fs::path(out_dir) / "trace.jsonl").string(),
                        std::ios::binary);
    trace << result.trace_jsonl();

    ordered_json summary;
    summary["seed"] = seed;
    summary["steps"] = result.trace.size();
    summary["results"] = result.results.size();
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_score_sim(const std::string& flow, const std::string& gt,
                  const std::string& registry_path) {
    const lego::Registry registry = load_registry(registry_path);
    const lego::Workflow g = lego::parse_workflow(read_text_file(flow));
    const lego::Workflow gt_flow = lego::parse_workflow(read_text_file(gt));
    std::printf("%.6f\n", lego::similarity_reward(g, gt_flow, &registry));
    return 0;
}

int cmd_score_effect(const std::string& flow, const std::string& task_path,
                     const std::string& registry_path,
                     const std::string& critic_kind) {
    const lego::Registry registry = load_registry(registry_path);
    const lego::Workflow w = lego::parse_workflow(read_text_file(flow));
    const lego::TaskSpec task = lego::TaskSpec::from_json(read_text_file(task_path));

    std::vector<lego::MetaEdit> meta;
    for (const auto& chain : lego::decompose_chains(w, registry))
        meta.push_back(lego::abstract_chain(chain, w, registry));

    std::unique_ptr<lego::Critic> critic;
    if (critic_kind == "remote")
        critic = std::make_unique<lego::RemoteCritic>(
            lego::RemoteCriticConfig::from_env());
    else
        critic = std::make_unique<lego::MockCritic>(task);

    const lego::Critique critique =
        lego::judge(meta, task.instruction, *critic);
    ordered_json out;
    out["n_add"] = critique.n_add();
    out["n_remove"] = critique.n_remove();
    out["r_effect"] =
        lego::effect_reward(critique.n_add(), critique.n_remove());
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_chains(const std::string& flow, const std::string& registry_path) {
    const lego::Registry registry = load_registry(registry_path);
    const lego::Workflow w = lego::parse_workflow(read_text_file(flow));
    ordered_json out = ordered_json::array();
    for (const auto& chain : lego::decompose_chains(w, registry)) {
        ordered_json entry;
        entry["editor"] = chain.editor;
        entry["editor_tool"] = chain.editor_tool;
        entry["support"] = chain.support;
        entry["inputs_from"] = chain.inputs_from;
        out.push_back(std::move(entry));
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_prompt(const std::string& instruction, const std::string& registry_path,
               const std::vector<std::string>& example_paths) {
    const lego::Registry registry = load_registry(registry_path);
    std::vector<std::pair<std::string, lego::Workflow>> examples;
    for (const auto& path : example_paths) {
        lego::Workflow w = lego::parse_workflow(read_text_file(path));
        examples.emplace_back(w.process, std::move(w));
    }
    std::cout << lego::assemble_builder_prompt(registry, examples, instruction);
    return 0;
}

int cmd_train_toy(const std::string& fixtures, const std::string& registry_path,
                  int iterations, int group, std::uint64_t seed,
                  const std::string& out_csv) {
    const lego::Registry registry = load_registry(registry_path);
    const std::vector<lego::ToyTask> tasks =
        lego::load_toy_tasks(read_text_file(fixtures));
    lego::ToyTrainConfig config;
    config.iterations = iterations;
    config.group_size = group;
    config.seed = seed;
    const lego::ToyTrainResult result =
        lego::toy_train(tasks, registry, config);
    const std::string csv = lego::curve_csv(result);
    if (out_csv.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_csv, std::ios::binary);
        out << csv;
    }
    ordered_json summary;
    summary["seed"] = seed;
    summary["iterations"] = iterations;
    summary["final_mean_reward"] =
        result.curve.empty() ? 0.0 : result.curve.back().mean_reward;
    std::cerr << summary.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workflow engine for tool-composed image editing"};
    app.require_subcommand(1);

    std::string flow, registry_path, gt, image_path, out_dir = "out";
    std::string task_path, critic_kind = "mock", instruction, fixtures;
    std::string out_csv;
    std::vector<std::string> example_paths;
    std::uint64_t seed = 0;
    int iterations = 300, group = 8;

    auto* validate = app.add_subcommand("validate", "Statically check a workflow");
    validate->add_option("-w,--workflow", flow, "Workflow JSON")->required();
    validate->add_option("--registry", registry_path, "Registry JSON");

    auto* run = app.add_subcommand("run", "Execute with the mock backend");
    run->add_option("-w,--workflow", flow, "Workflow JSON")->required();
    run->add_option("-i,--image", image_path, "Initial image (PPM)")->required();
    run->add_option("--registry", registry_path, "Registry JSON");
    run->add_option("--seed", seed, "Backend seed");
    run->add_option("-o,--out", out_dir, "Output directory");

    auto* score = app.add_subcommand("score", "Reward scoring");
    score->require_subcommand(1);
    auto* sim = score->add_subcommand("sim", "Similarity against a reference");
    sim->add_option("-w,--workflow", flow, "Workflow JSON")->required();
    sim->add_option("--gt", gt, "Reference workflow JSON")->required();
    sim->add_option("--registry", registry_path, "Registry JSON");
    auto* effect = score->add_subcommand("effect", "Critique-based effect");
    effect->add_option("-w,--workflow", flow, "Workflow JSON")->required();
    effect->add_option("--task", task_path, "Task spec JSON")->required();
    effect->add_option("--critic", critic_kind, "mock or remote")
        ->check(CLI::IsMember({"mock", "remote"}));
    effect->add_option("--registry", registry_path, "Registry JSON");

    auto* chains = app.add_subcommand("chains", "List editing chains");
    chains->add_option("-w,--workflow", flow, "Workflow JSON")->required();
    chains->add_option("--registry", registry_path, "Registry JSON");

    auto* prompt = app.add_subcommand("prompt", "Assemble the planner prompt");
    prompt->add_option("--instruction", instruction, "User instruction")
        ->required();
    prompt->add_option("--registry", registry_path, "Registry JSON");
    prompt->add_option("--example", example_paths, "Few-shot workflow JSON");

    auto* train = app.add_subcommand("train-toy", "Run the tabular trainer");
    train->add_option("--fixtures", fixtures, "Task fixture JSON")->required();
    train->add_option("--iters", iterations, "Iterations");
    train->add_option("--group", group, "Group size");
    train->add_option("--seed", seed, "RNG seed");
    train->add_option("--out", out_csv, "Curve CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(flow, registry_path);
        if (run->parsed())
            return cmd_run(flow, image_path, registry_path, out_dir, seed);
        if (score->parsed()) {
            if (sim->parsed()) return cmd_score_sim(flow, gt, registry_path);
            if (effect->parsed())
                return cmd_score_effect(flow, task_path, registry_path,
                                        critic_kind);
        }
        if (chains->parsed()) return cmd_chains(flow, registry_path);
        if (prompt->parsed())
            return cmd_prompt(instruction, registry_path, example_paths);
        if (train->parsed())
            return cmd_train_toy(fixtures, registry_path, iterations, group,
                                 seed, out_csv);
    } catch (const lego::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
