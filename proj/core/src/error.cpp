#include "callgram/error.hpp"

namespace callgram {

ErrorFamily family_of(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedReport:
    case ErrorCode::EmptyReport:
    case ErrorCode::ManifestError:
    case ErrorCode::BadTemplate:
        return ErrorFamily::Input;
    case ErrorCode::BadOrder:
    case ErrorCode::EmptyDocument:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::EmptySelection:
        return ErrorFamily::Features;
    case ErrorCode::UnlabeledSample:
    case ErrorCode::EmptyClass:
    case ErrorCode::InsufficientClasses:
    case ErrorCode::OrderMismatch:
    case ErrorCode::MissingTruth:
    case ErrorCode::EmptyMatrix:
        return ErrorFamily::Classification;
    case ErrorCode::IntegrityError:
    case ErrorCode::VersionError:
        return ErrorFamily::Model;
    case ErrorCode::VocabTooLarge:
        return ErrorFamily::Image;
    case ErrorCode::IoError:
        return ErrorFamily::Io;
    case ErrorCode::UsageError:
        return ErrorFamily::Usage;
    }
    return ErrorFamily::Usage;
}

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedReport: return "MalformedReport";
    case ErrorCode::EmptyReport: return "EmptyReport";
    case ErrorCode::ManifestError: return "ManifestError";
    case ErrorCode::BadOrder: return "BadOrder";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::UnlabeledSample: return "UnlabeledSample";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::InsufficientClasses: return "InsufficientClasses";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::VocabTooLarge: return "VocabTooLarge";
    case ErrorCode::BadTemplate: return "BadTemplate";
    case ErrorCode::IntegrityError: return "IntegrityError";
    case ErrorCode::VersionError: return "VersionError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
    }
    return "UnknownError";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error{std::string{to_string(code)} + ": " + message}, code_{code} {}

}  // namespace callgram
