#include "rtlforge/error.hpp"

namespace rtlforge {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "invalid_argument";
        case ErrorCode::kIoError: return "io_error";
        case ErrorCode::kTransportError: return "transport_error";
        case ErrorCode::kProviderError: return "provider_error";
        case ErrorCode::kReplayMiss: return "replay_miss";
        case ErrorCode::kParseError: return "parse_error";
        case ErrorCode::kDuplicateId: return "duplicate_id";
        case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
        case ErrorCode::kUnknownId: return "unknown_id";
        case ErrorCode::kMissingVectors: return "missing_vectors";
        case ErrorCode::kLlmFailure: return "llm_failure";
        case ErrorCode::kFormatError: return "format_error";
        case ErrorCode::kLineOutOfRange: return "line_out_of_range";
        case ErrorCode::kBadHeader: return "bad_header";
        case ErrorCode::kBadGraySequence: return "bad_gray_sequence";
        case ErrorCode::kCellCountMismatch: return "cell_count_mismatch";
        case ErrorCode::kBadCellSymbol: return "bad_cell_symbol";
        case ErrorCode::kInconsistentRows: return "inconsistent_rows";
        case ErrorCode::kWidthMismatch: return "width_mismatch";
        case ErrorCode::kNondeterministicTransition: return "nondeterministic_transition";
        case ErrorCode::kUnknownStateReference: return "unknown_state_reference";
        case ErrorCode::kContradictorySamples: return "contradictory_samples";
        case ErrorCode::kPortMismatch: return "port_mismatch";
        case ErrorCode::kOverlapError: return "overlap_error";
        case ErrorCode::kToolError: return "tool_error";
        case ErrorCode::kCompileError: return "compile_error";
        case ErrorCode::kTimeoutExceeded: return "timeout_exceeded";
        case ErrorCode::kWrongStatus: return "wrong_status";
        case ErrorCode::kNoModuleFound: return "no_module_found";
        case ErrorCode::kSchemaError: return "schema_error";
        case ErrorCode::kInconsistentPath: return "inconsistent_path";
        case ErrorCode::kEmptySuite: return "empty_suite";
    }
    return "unknown";
}

}  // namespace rtlforge
