#include "eegtriage/errors.hpp"

namespace eegtriage {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::MalformedField: return "MalformedField";
        case ErrorCode::InvalidCalibration: return "InvalidCalibration";
        case ErrorCode::UnknownElectrode: return "UnknownElectrode";
        case ErrorCode::MixedSamplingRate: return "MixedSamplingRate";
        case ErrorCode::MissingChannels: return "MissingChannels";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::SegmentTooLong: return "SegmentTooLong";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::ManifestMismatch: return "ManifestMismatch";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::NoPositives: return "NoPositives";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::TooFewPatients: return "TooFewPatients";
        case ErrorCode::DegenerateRank: return "DegenerateRank";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace eegtriage
