// feature_select.hpp
//
// Vocabulary reduction.  Three rules run in a fixed order:
//   1. drop tokens whose document frequency is below min_df
//   2. drop tokens whose df / N exceeds max_df_fraction
//   3. keep the top_k survivors by TF-IDF mass summed over the corpus,
//      ties broken by ascending token text

#ifndef CALLGRAM_FEATURE_SELECT_HPP
#define CALLGRAM_FEATURE_SELECT_HPP

#include "callgram/featurize.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace callgram {

struct SelectionParams {
    std::size_t min_df = 2;
    double max_df_fraction = 0.9;
    std::size_t top_k = 100000;

    /// throws UsageError on out-of-range values
    void validate() const;

    bool operator==(const SelectionParams &) const = default;
};

struct SelectionReport {
    std::size_t vocab_before = 0;
    std::size_t vocab_after = 0;
    double kept_fraction = 0.0;
    std::vector<std::pair<std::string, std::size_t>> rules_applied;  ///< (rule, tokens removed)
};

struct Selection {
    TokenSet selected;
    SelectionReport report;
};

/// Throws EmptyCorpus, EmptySelection or UsageError.
Selection select_features(std::span<const TokenDocument> docs, const SelectionParams &params);

}  // namespace callgram

#endif  // CALLGRAM_FEATURE_SELECT_HPP
