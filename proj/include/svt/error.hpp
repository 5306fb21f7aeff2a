#pragma once

#include <stdexcept>
#include <string>

namespace svt {

// Values mirror the C API status codes in svt.h.
enum class ErrorCode : int {
    invalid_argument = 10,
    io = 11,
    schema = 12,
    parse = 13,
    range = 14,
    unmapped_level = 15,
    degenerate_column = 16,
    schema_conflict = 17,
    empty_dataset = 18,
    infeasible = 19,
    unsupported_task = 20,
    insufficient_data = 30,
    singular = 31,
    numeric = 32,
    no_trainable_parameters = 33,
    integrity = 34,
    unsupported_version = 35,
};

// Validation errors are caused by bad input (exit code 2 in the CLI);
// everything else is a runtime/numeric failure (exit code 3).
inline bool is_validation_error(ErrorCode code) {
    return static_cast<int>(code) < 30;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace svt
