// Error types shared across the toolkit. Every throwing path uses one of
// these so callers (CLI, campaign runner) can map failures to exit codes
// and retry decisions.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace picosync {

class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// A precondition or domain invariant was violated by an argument.
class parameter_error : public error {
public:
    explicit parameter_error(const std::string& msg) : error(msg) {}
};

// The delayed pulse does not fit inside the requested receive window;
// signals a mis-scheduled receive gate. Retryable at the protocol layer.
class window_overrun_error : public error {
public:
    explicit window_overrun_error(const std::string& msg) : error(msg) {}
};

// Matched-filter peak landed on the first or last metric sample, so the
// three-point refinement is undefined. Retryable at the protocol layer.
class boundary_error : public error {
public:
    explicit boundary_error(const std::string& msg) : error(msg) {}
};

// Zero curvature at the metric peak (flat top); refinement undefined.
class flat_peak_error : public error {
public:
    explicit flat_peak_error(const std::string& msg) : error(msg) {}
};

// Experiment configuration failed validation; lists the offending fields.
class validation_error : public error {
public:
    validation_error(const std::string& msg, std::vector<std::string> fields)
        : error(msg), fields_(std::move(fields)) {}
    const std::vector<std::string>& fields() const { return fields_; }

private:
    std::vector<std::string> fields_;
};

class io_error : public error {
public:
    explicit io_error(const std::string& msg) : error(msg) {}
};

// True when the failure is one the two-way exchange may simply retry
// (bad gate, ambiguous or degenerate peak) rather than a usage bug.
inline bool is_retryable(const error& e) {
    return dynamic_cast<const window_overrun_error*>(&e) != nullptr ||
           dynamic_cast<const boundary_error*>(&e) != nullptr ||
           dynamic_cast<const flat_peak_error*>(&e) != nullptr;
}

} // namespace picosync
