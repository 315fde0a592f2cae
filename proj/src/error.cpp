#include "syndr/error.hpp"

namespace syndr {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::malformed_header: return "malformed_header";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::zero_norm: return "zero_norm";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::missing_label: return "missing_label";
    case ErrorCode::id_misalignment: return "id_misalignment";
    case ErrorCode::malformed_record: return "malformed_record";
    case ErrorCode::invalid_config: return "invalid_config";
    }
    return "unknown";
}

} // namespace syndr
