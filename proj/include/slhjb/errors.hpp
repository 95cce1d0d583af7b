#ifndef SLHJB_ERRORS_HPP
#define SLHJB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace slhjb {

enum class ErrorCode {
    invalid_order,        // Gauss-Hermite order out of range
    capacity,             // tensor rule exceeds the node cap
    reduction_failed,     // Caratheodory elimination hit a singular step
    invalid_point,        // non-finite interpolation query
    configuration,        // missing asymptote, bad option combination
    invalid_model,        // model parameter violations
    unsupported_stepper,  // weak2 with unsupported coefficients
    numerical_blowup,     // non-finite value in the backward recursion
    insufficient_data,    // too few refinement levels / samples
    invalid_interval,     // empty measurement interval
    invalid_config,       // config file parse or validation failure
    io                    // file I/O failure
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Blowup during backward_solve; identifies the offending (time slice, node, control).
class BlowupError : public Error {
public:
    BlowupError(int slice, std::size_t node, int control, const std::string& message)
        : Error(ErrorCode::numerical_blowup, message),
          slice_(slice), node_(node), control_(control) {}

    int slice() const noexcept { return slice_; }
    std::size_t node() const noexcept { return node_; }
    int control() const noexcept { return control_; }

private:
    int slice_;
    std::size_t node_;
    int control_;
};

}  // namespace slhjb

#endif  // SLHJB_ERRORS_HPP
