#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace effmass {

/// Invalid input: unknown names, out-of-domain arguments, violated model constraints.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what, std::vector<std::string> violations = {})
        : std::invalid_argument(what), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Evaluation failed: poles, quadrature or bisection non-convergence, divergent integrals.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, std::string code = "numerical")
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace effmass
