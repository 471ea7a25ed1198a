#include "mridvr/error.hpp"

namespace mridvr {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Io: return "Io";
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::DecompressionFailure: return "DecompressionFailure";
        case ErrorCode::DegenerateRange: return "DegenerateRange";
        case ErrorCode::InsufficientModes: return "InsufficientModes";
        case ErrorCode::VolumeTooSmall: return "VolumeTooSmall";
        case ErrorCode::BoundaryCoordinate: return "BoundaryCoordinate";
        case ErrorCode::DegenerateCamera: return "DegenerateCamera";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::PreprocessMismatch: return "PreprocessMismatch";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::GpuUnavailable: return "GpuUnavailable";
        case ErrorCode::VolumeTooLarge: return "VolumeTooLarge";
        case ErrorCode::DeviceLost: return "DeviceLost";
    }
    return "Unknown";
}

} // namespace mridvr
