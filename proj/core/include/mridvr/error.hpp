#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mridvr {

enum class ErrorCode {
    Io,
    MalformedHeader,
    UnsupportedDatatype,
    TruncatedPayload,
    DecompressionFailure,
    DegenerateRange,
    InsufficientModes,
    VolumeTooSmall,
    BoundaryCoordinate,
    DegenerateCamera,
    OutOfBounds,
    PreprocessMismatch,
    InvalidParams,
    GpuUnavailable,
    VolumeTooLarge,
    DeviceLost,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported as Error; code() is stable, what() is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mridvr
