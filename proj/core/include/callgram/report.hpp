// report.hpp
//
// Sandbox behavioral report ingestion.  A report is reduced to the ordered
// list of hooked API calls (category, name, arguments, return value); all
// other report content is ignored.

#ifndef CALLGRAM_REPORT_HPP
#define CALLGRAM_REPORT_HPP

#include "callgram/io.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace callgram {

/// one hooked call; arguments are kept in report order
struct ApiCallRecord {
    std::string category;
    std::string api_name;
    std::vector<std::string> arguments;
    std::string return_value;

    bool operator==(const ApiCallRecord &) const = default;
};

struct BehaviorReport {
    std::string sample_id;
    std::optional<std::string> label;
    std::vector<ApiCallRecord> calls;
    std::string source_path;
    std::size_t dropped_calls = 0;  ///< calls skipped because they had no api name

    bool operator==(const BehaviorReport &) const = default;
};

/// replacement written in place of every invalid UTF-8 sequence (U+FFFD)
inline constexpr std::string_view substitution_mark = "\xEF\xBF\xBD";

/// Replaces every ill-formed UTF-8 sequence with `substitution_mark`.
std::string sanitize_utf8(std::string_view bytes);

/// Trims an api name and collapses interior whitespace runs to '_'.
std::string normalize_api_name(std::string_view name);

/// Parses one report in the behavior/processes/calls layout.  Calls are
/// concatenated in process order, then call order.  Throws MalformedReport
/// or EmptyReport.
BehaviorReport parse_report(std::string_view raw_bytes, const std::string &sample_id);

/// Canonical dump: the same JSON layout with a single process and array
/// arguments.  parse_report(dump_report(r), r.sample_id).calls == r.calls.
std::string dump_report(const BehaviorReport &report);

enum class Split { Train, Test };

std::string_view to_string(Split split) noexcept;

struct ManifestEntry {
    std::filesystem::path path;  ///< resolved relative to the manifest directory
    std::string sample_id;
    std::string label;           ///< empty when unlabeled
    Split split = Split::Train;
};

struct CorpusManifest {
    std::vector<ManifestEntry> entries;

    std::vector<const ManifestEntry *> with_split(Split split) const;
};

/// Reads a CSV (header `path,sample_id,label,split`) or JSON-array manifest.
/// Validates file existence, split tags and sample_id uniqueness; throws
/// ManifestError.
CorpusManifest load_manifest(const std::filesystem::path &manifest_path);

/// Writes a CSV manifest; paths are written relative to the manifest directory
/// when possible.
void write_manifest(const CorpusManifest &manifest, const std::filesystem::path &manifest_path);

struct ClassCounts {
    std::size_t train = 0;
    std::size_t test = 0;

    bool operator==(const ClassCounts &) const = default;
};

struct LoadStatistics {
    /// rows in first-appearance order of the class label
    std::vector<std::pair<std::string, ClassCounts>> per_class;
    std::size_t dropped_calls = 0;
    std::size_t total_calls = 0;

    ClassCounts totals() const;
    const ClassCounts *find(std::string_view label) const;
    /// plain-text table: class, train, test, total
    std::string table() const;
};

LoadStatistics manifest_statistics(const CorpusManifest &manifest);

/// Reads and parses one manifest entry; attaches label and source path.
BehaviorReport load_report(const ManifestEntry &entry);

struct LoadedCorpus {
    std::vector<BehaviorReport> reports;  ///< manifest order
    LoadStatistics stats;
};

LoadedCorpus load_corpus(const std::filesystem::path &manifest_path);

/// Streams entries one report at a time, in manifest order.
void for_each_report(std::span<const ManifestEntry *const> entries,
                     const std::function<void(const ManifestEntry &, BehaviorReport &&)> &visit);

}  // namespace callgram

#endif  // CALLGRAM_REPORT_HPP
