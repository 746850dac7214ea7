#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rambler {

enum class ErrorCode {
    NotFound,
    Conflict,
    InvalidState,
    BackendFailure,
    BadRequest,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Conflict: return "Conflict";
        case ErrorCode::InvalidState: return "InvalidState";
        case ErrorCode::BackendFailure: return "BackendFailure";
        case ErrorCode::BadRequest: return "BadRequest";
    }
    return "BadRequest";
}

/// Error raised by every rambler operation. Carries exactly one code plus
/// optional details (offending ramble ids, the raw text that failed to clean).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {})
        : std::runtime_error(message), code_(code), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    std::vector<std::string> details_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message,
                              std::vector<std::string> details = {}) {
    throw Error(code, message, std::move(details));
}

}  // namespace rambler
