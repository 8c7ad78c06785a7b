#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fatnode {

// Bad input: malformed config, violated field constraint. CLI maps this to exit 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// No feasible configuration exists. CLI maps this to exit 3.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Fewer observations than free parameters. CLI maps this to exit 4.
class UnderdeterminedError : public std::runtime_error {
public:
    UnderdeterminedError(const std::string& what, std::vector<std::string> free_params)
        : std::runtime_error(what), free_parameters(std::move(free_params)) {}

    std::vector<std::string> free_parameters;
};

}  // namespace fatnode
