// persistence.hpp
//
// Trained-model container and vocabulary listing.  Both are line-oriented
// UTF-8 text; the model ends with a SHA-256 digest over every byte before
// the digest line.  Layout is described in docs/formats.md.

#ifndef CALLGRAM_PERSISTENCE_HPP
#define CALLGRAM_PERSISTENCE_HPP

#include "callgram/feature_select.hpp"
#include "callgram/profile.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace callgram {

inline constexpr int model_format_version = 1;
inline constexpr std::string_view library_version = "1.0.0";

struct Model {
    int format_version = model_format_version;
    int order = 1;
    SelectionParams selection;
    std::size_t profile_cap = 0;
    std::size_t training_samples = 0;
    std::string generator = "callgram " + std::string{library_version};
    TokenSet vocab;
    std::vector<ClassProfile> profiles;  ///< sorted by class name

    std::vector<std::string> class_names() const;

    bool operator==(const Model &) const = default;
};

/// sha256 over the sorted tokens, each followed by '\n'
std::string vocab_digest(const TokenSet &vocab);

/// Canonical bytes; a pure function of the model.  Throws UsageError for an
/// unsaveable model (no profiles, tokens containing newlines).
std::string serialize_model(const Model &model);

/// Throws IntegrityError or VersionError.
Model parse_model(std::string_view bytes);

/// Atomic write.  Throws IoError, UsageError.
void save_model(const Model &model, const std::filesystem::path &path);
Model load_model(const std::filesystem::path &path);

/// Header comment with the selection parameters, then one token per line.
std::string serialize_vocabulary(const TokenSet &vocab, int order, const SelectionParams &params);
void save_vocabulary(const TokenSet &vocab, int order, const SelectionParams &params,
                     const std::filesystem::path &path);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace callgram

#endif  // CALLGRAM_PERSISTENCE_HPP
