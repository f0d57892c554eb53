#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ria {

enum class ErrorCode {
    EmptyQuery,
    NotFound,
    IllegalTransition,
    IoError,
    CorruptSnapshot,
    DuplicateId,
    InvalidDescriptor,
    WeightSumInvalid,
    NegativeSurvivors,
    OutOfRange,
    XmlMalformed,
    MissingBody,
    MissingMessageId,
    MissingField,
    BadPort,
    MissingBinding,
    InvalidQos,
    InvalidStrategy,
    InvalidConfig,
};

inline const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyQuery: return "EmptyQuery";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::IllegalTransition: return "IllegalTransition";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::InvalidDescriptor: return "InvalidDescriptor";
        case ErrorCode::WeightSumInvalid: return "WeightSumInvalid";
        case ErrorCode::NegativeSurvivors: return "NegativeSurvivors";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::XmlMalformed: return "XmlMalformed";
        case ErrorCode::MissingBody: return "MissingBody";
        case ErrorCode::MissingMessageId: return "MissingMessageId";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::BadPort: return "BadPort";
        case ErrorCode::MissingBinding: return "MissingBinding";
        case ErrorCode::InvalidQos: return "InvalidQos";
        case ErrorCode::InvalidStrategy: return "InvalidStrategy";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

// Every failure across the broker surfaces as one of the codes above; the
// detail string carries context (field name, path, offending value).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string detail)
        : std::runtime_error(std::string(error_name(code)) + ": " + detail),
          code_(code),
          detail_(std::move(detail)) {}

    explicit Error(ErrorCode code) : Error(code, "") {}

    ErrorCode code() const noexcept { return code_; }
    const char* name() const noexcept { return error_name(code_); }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] inline void raise(ErrorCode code, std::string detail = "") {
    throw Error(code, std::move(detail));
}

}  // namespace ria
