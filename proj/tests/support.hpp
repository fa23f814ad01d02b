#pragma once

#include "lego/registry.hpp"
#include "lego/workflow.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace support {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string data_path(const std::string& relative) {
    return std::string(LEGO_DATA_DIR) + "/" + relative;
}

inline lego::Workflow load_fixture(const std::string& name) {
    return lego::parse_workflow(read_file(data_path("fixtures/" + name)));
}

// Random, structurally valid workflow over the default registry: every step
// feeds on init[image] or earlier image outputs, masks come from RES, and
// the result returns the last image. Used by round-trip, matcher, and
// mutation property suites.
inline lego::Workflow random_workflow(std::mt19937_64& rng) {
    const lego::Registry registry = lego::Registry::bundled_default();
    const std::vector<std::string> prompts = {"dog",  "cat",   "red car",
                                              "tree", "cloud", "hat"};
    std::uniform_int_distribution<int> step_count(1, 6);
    const int n = step_count(rng);

    lego::Workflow w;
    w.process = "random";
    std::vector<int> image_steps;  // steps with an image output
    std::vector<int> mask_steps;   // steps with a mask output

    auto image_ref = [&]() {
        if (image_steps.empty() || rng() % 3 == 0)
            return lego::ValueRef::init("image");
        return lego::ValueRef::step_ref(
            image_steps[rng() % image_steps.size()], "image");
    };

    for (int i = 1; i <= n; ++i) {
        lego::Step step;
        step.index = i;
        const bool can_edit = !mask_steps.empty();
        const int pick = static_cast<int>(rng() % (can_edit ? 4 : 2));
        switch (pick) {
            case 0:
                step.model = "RES";
                step.inputs = {{"image", image_ref()},
                               {"prompt", lego::ValueRef::literal(
                                              prompts[rng() % prompts.size()])}};
                mask_steps.push_back(i);
                image_steps.push_back(i);
                break;
            case 1:
                step.model = "SOS";
                step.inputs = {{"image", image_ref()}};
                mask_steps.push_back(i);
                image_steps.push_back(i);
                break;
            case 2:
                step.model = "FLUX-FILL";
                step.inputs = {
                    {"image", image_ref()},
                    {"mask", lego::ValueRef::step_ref(
                                 mask_steps[rng() % mask_steps.size()], "mask")},
                    {"prompt", lego::ValueRef::literal(
                                   prompts[rng() % prompts.size()])},
                    {"preimage", lego::ValueRef::null()}};
                image_steps.push_back(i);
                break;
            default:
                step.model = "FASTINPAINT";
                step.inputs = {
                    {"image", image_ref()},
                    {"mask", lego::ValueRef::step_ref(
                                 mask_steps[rng() % mask_steps.size()], "mask")}};
                image_steps.push_back(i);
                break;
        }
        w.steps.push_back(std::move(step));
    }
    w.result = {lego::ValueRef::step_ref(image_steps.back(), "image")};
    return w;
}

} // namespace support
