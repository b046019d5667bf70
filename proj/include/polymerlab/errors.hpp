// Exception taxonomy mirrored in the CLI exit codes: validation errors
// (std::invalid_argument / std::domain_error / ConfigError) -> 1,
// CapExceeded -> 2, NumericError -> 3.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace polymerlab {

class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid configuration:";
        for (const auto& p : v) {
            s += "\n  - " + p;
        }
        return s;
    }

    std::vector<std::string> problems_;
};

} // namespace polymerlab
