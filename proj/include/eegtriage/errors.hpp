#pragma once

#include <stdexcept>
#include <string>

namespace eegtriage {

enum class ErrorCode {
    TruncatedFile,
    MalformedField,
    InvalidCalibration,
    UnknownElectrode,
    MixedSamplingRate,
    MissingChannels,
    TooShort,
    SegmentTooLong,
    EmptyInput,
    ManifestMismatch,
    DegenerateLabels,
    NonFiniteLoss,
    NoPositives,
    SingleClass,
    LengthMismatch,
    TooFewPatients,
    DegenerateRank,
    InvalidConfig,
    IoError,
    Internal,
};

const char* error_code_name(ErrorCode code);

// Data/usage errors raised throughout the pipeline. The CLI maps these to
// exit code 2 (data) or 1 (usage); ErrorCode::Internal maps to exit code 3.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Invariant violations (bugs, not bad input).
inline void internal_check(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::Internal, what);
}

}  // namespace eegtriage
