#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lego {

// Structured failure raised by parsers, the registry, and the engine.
// `code` is a stable machine-readable tag such as "MalformedRef".
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

} // namespace lego
