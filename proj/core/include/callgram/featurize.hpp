// featurize.hpp
//
// Call tokens, n-gram documents and TF / TF-IDF weighting.
//
// A call becomes one token: the api name followed by each argument, joined
// with '_' (a call without arguments yields "<api>_na").  Inside argument
// values '\', '_' and ',' are backslash-escaped and whitespace runs become a
// single '_'.  An n-gram is n consecutive call tokens joined with ','.

#ifndef CALLGRAM_FEATURIZE_HPP
#define CALLGRAM_FEATURIZE_HPP

#include "callgram/report.hpp"

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace callgram {

using TokenSet = std::set<std::string>;

/// arguments longer than this (in bytes) are cut and tagged with a hash
inline constexpr std::size_t max_argument_length = 256;
inline constexpr int min_order = 1;
inline constexpr int max_order = 3;

struct TokenDocument {
    std::string sample_id;
    std::string label;                         ///< empty when unlabeled
    int order = 1;
    std::vector<std::string> tokens;           ///< may be released after counting
    std::map<std::string, std::size_t> counts;

    std::size_t total() const noexcept;
    bool empty() const noexcept { return counts.empty(); }
    TokenSet token_set() const;
    /// frees the ordered n-gram list; counts stay intact
    void drop_sequence();

    bool operator==(const TokenDocument &) const = default;
};

enum class WeightScheme { TF, TFIDF };

struct WeightedVector {
    std::string sample_id;
    std::map<std::string, double> weights;  ///< all strictly positive
    WeightScheme scheme = WeightScheme::TF;
};

/// Normalizes one argument value: truncation, escaping, whitespace folding.
std::string encode_argument(std::string_view value);

std::string tokenize_call(const ApiCallRecord &call);

/// Sliding window of width `order` over the call tokens.  Throws BadOrder.
TokenDocument ngrams(const BehaviorReport &report, int order);

/// weight(t) = count(t) / total.  Throws EmptyDocument.
WeightedVector term_frequency(const TokenDocument &doc);

/// ln((1 + n_docs) / (1 + df)) + 1
double smoothed_idf(std::size_t n_docs, std::size_t df) noexcept;

std::map<std::string, std::size_t> document_frequencies(std::span<const TokenDocument> docs);

/// TF x smoothed IDF over the given corpus.  Throws EmptyCorpus or
/// OrderMismatch.
std::vector<WeightedVector> tfidf(std::span<const TokenDocument> docs);

/// `#sample_id order token_count` then one token per line
std::string dump_token_document(const TokenDocument &doc);
TokenDocument parse_token_document(std::string_view text);

}  // namespace callgram

#endif  // CALLGRAM_FEATURIZE_HPP
