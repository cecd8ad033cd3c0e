// error.hpp
//
// Typed failures raised by the callgram library.  Every error carries a
// code; codes are grouped into families and each family maps to one
// process exit status in the command-line tool.

#ifndef CALLGRAM_ERROR_HPP
#define CALLGRAM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace callgram {

enum class ErrorCode {
    MalformedReport,
    EmptyReport,
    ManifestError,
    BadOrder,
    EmptyDocument,
    EmptyCorpus,
    EmptySelection,
    UnlabeledSample,
    EmptyClass,
    InsufficientClasses,
    OrderMismatch,
    MissingTruth,
    EmptyMatrix,
    VocabTooLarge,
    BadTemplate,
    IntegrityError,
    VersionError,
    IoError,
    UsageError,
};

/// coarse grouping of error codes; one exit status per family
enum class ErrorFamily {
    Input = 3,           // reports, manifests, templates
    Features = 4,        // n-gram / weighting / selection
    Classification = 5,  // profiles, classification, evaluation
    Model = 6,           // model store integrity and versioning
    Image = 7,
    Io = 8,
    Usage = 2,
};

ErrorFamily family_of(ErrorCode code) noexcept;
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message);

    ErrorCode code() const noexcept { return code_; }
    ErrorFamily family() const noexcept { return family_of(code_); }
    int exit_code() const noexcept { return static_cast<int>(family()); }

private:
    ErrorCode code_;
};

}  // namespace callgram

#endif  // CALLGRAM_ERROR_HPP
