#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace syndr {

enum class ErrorCode {
    io,
    malformed_header,
    dimension_mismatch,
    duplicate_id,
    non_finite,
    zero_norm,
    invalid_argument,
    out_of_range,
    missing_label,
    id_misalignment,
    malformed_record,
    invalid_config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. `code()` distinguishes failure classes so that
/// callers (and tests) do not have to match on message text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace syndr
