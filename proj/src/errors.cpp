#include "slhjb/errors.hpp"

namespace slhjb {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_order: return "invalid-order";
        case ErrorCode::capacity: return "capacity";
        case ErrorCode::reduction_failed: return "reduction-failed";
        case ErrorCode::invalid_point: return "invalid-point";
        case ErrorCode::configuration: return "configuration";
        case ErrorCode::invalid_model: return "invalid-model";
        case ErrorCode::unsupported_stepper: return "unsupported-stepper";
        case ErrorCode::numerical_blowup: return "numerical-blowup";
        case ErrorCode::insufficient_data: return "insufficient-data";
        case ErrorCode::invalid_interval: return "invalid-interval";
        case ErrorCode::invalid_config: return "invalid-config";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

}  // namespace slhjb
