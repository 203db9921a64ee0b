#pragma once

#include <stdexcept>
#include <string>

namespace mmclab {

// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller supplied an argument outside an operation's contract.
class invalid_argument_error : public error {
public:
    explicit invalid_argument_error(const std::string& msg) : error(msg) {}
};

// Geometrically degenerate input, e.g. coincident start points.
class degenerate_input_error : public error {
public:
    explicit degenerate_input_error(const std::string& msg) : error(msg) {}
};

// The requested construction has no meaning for these inputs
// (e.g. mirror dynamics for a drift that admits no maximal coupling).
class not_admissible_error : public error {
public:
    explicit not_admissible_error(const std::string& msg) : error(msg) {}
};

// A numerical routine failed to reach its accuracy target.
// Carries the best estimate computed so far.
class numerical_failure_error : public error {
public:
    numerical_failure_error(const std::string& msg, double best)
        : error(msg), best_estimate(best) {}
    double best_estimate;
};

}  // namespace mmclab
