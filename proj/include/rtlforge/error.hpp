#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtlforge {

// Every failure the library reports is one of these codes. The names follow
// the error vocabulary used across the modules so callers can branch on them.
enum class ErrorCode {
    kInvalidArgument,
    kIoError,
    // llm_client
    kTransportError,
    kProviderError,
    kReplayMiss,
    // knowledge_base
    kParseError,
    kDuplicateId,
    kDimensionMismatch,
    kUnknownId,
    kMissingVectors,
    // spec_refiner / debugger
    kLlmFailure,
    kFormatError,
    kLineOutOfRange,
    // multimodal
    kBadHeader,
    kBadGraySequence,
    kCellCountMismatch,
    kBadCellSymbol,
    kInconsistentRows,
    kWidthMismatch,
    kNondeterministicTransition,
    kUnknownStateReference,
    kContradictorySamples,
    kPortMismatch,
    kOverlapError,
    // simulation
    kToolError,
    kCompileError,
    kTimeoutExceeded,
    kWrongStatus,
    // pipeline
    kNoModuleFound,
    // taxonomy
    kSchemaError,
    kInconsistentPath,
    // bench
    kEmptySuite,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rtlforge
