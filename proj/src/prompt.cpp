#include "lego/prompt.hpp"

#include "lego/errors.hpp"

#include <sstream>

namespace lego {

namespace {

void render_tool(std::ostream& os, int number, const ToolSpec& tool) {
    os << number << "." << tool.canonical_name << " (" << tool.description
       << ")\n";
    os << "Input: {";
    for (std::size_t i = 0; i < tool.inputs.size(); ++i) {
        if (i) os << ", ";
        os << to_string(tool.inputs[i].type) << "[" << tool.inputs[i].name
           << "]";
    }
    os << "}\n";
    os << "Output: {";
    for (std::size_t i = 0; i < tool.outputs.size(); ++i) {
        if (i) os << ", ";
        os << to_string(tool.outputs[i].type) << "[" << tool.outputs[i].name
           << "]";
    }
    os << "}\n";
    os << "Constraint: ";
    if (tool.constraints.empty()) {
        os << "None";
    } else {
        for (std::size_t i = 0; i < tool.constraints.size(); ++i) {
            if (i) os << " ";
            os << describe_constraint(tool.constraints[i]);
        }
    }
    os << "\n";
}

} // namespace

std::string assemble_builder_prompt(
    const Registry& r,
    const std::vector<std::pair<std::string, Workflow>>& examples,
    const std::string& instruction) {
    if (r.size() == 0) fail("EmptyRegistry", "cannot render an empty library");

    std::ostringstream os;
    os << "**System Role**\n"
          "You are an image processing engine scheduler, responsible for "
          "converting the natural language instructions provided by the user "
          "into an executable multi-model collaboration process json. All "
          "inputs must come from the initial parameters, the output of a "
          "previous model, or your own decomposition of the instruction.\n"
          "\n"
          "**Processing rules**\n"
          "1. Input traceability principle\n"
          "- Each model parameter can only be:\n"
          "a. The initial image\n"
          "b. Text in user instructions\n"
          "c. Output of previous steps\n"
          "d. The result of your own analysis of the user instruction\n"
          "2. Process generation steps\n"
          "a. Extract the operation object and action from the user "
          "instruction\n"
          "b. Select the corresponding model for each operation, making sure "
          "the chosen model and its parameters meet the model's "
          "requirements\n"
          "c. Establish a cross-model data dependency chain; the output of "
          "each step must be used later, otherwise that step is redundant\n"
          "\n"
          "**Input and output types**\n"
          "There are only four types of input and output\n"
          "1. Image\n"
          "2. Mask\n"
          "3. Str (only supports English input)\n"
          "4. Float\n"
          "\n"
          "**Model library**\n"
          "Models can be divided into two types: PREDICT model and EDIT "
          "model\n";

    os << "PREDICT model list:\n";
    int number = 0;
    for (const auto& tool : r.tools())
        if (tool.kind == ToolKind::Predictive) render_tool(os, ++number, tool);

    os << "\nEDIT model list:\n";
    number = 0;
    for (const auto& tool : r.tools())
        if (tool.kind != ToolKind::Predictive) render_tool(os, ++number, tool);

    int example_number = 0;
    for (const auto& [example_instruction, workflow] : examples) {
        os << "\n**Actual example" << ++example_number << ":**\n";
        os << "Instruction: \"" << example_instruction << "\"\n";
        os << serialize_workflow(workflow) << "\n";
    }

    os << "\nNow, I give you the image and the user instruction: \""
       << instruction
       << "\", please output the multi-model collaboration process json.\n";
    return os.str();
}

} // namespace lego
