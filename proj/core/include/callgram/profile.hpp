// profile.hpp
//
// Per-class reference profiles and Jaccard classification.
//
// A profile is the union of a class's training token sets restricted to the
// selected vocabulary, capped to the tokens with the largest class-summed
// TF-IDF weight.  A sample is assigned to the profile with the highest
// Jaccard similarity; ties go to the lexicographically smallest class name.

#ifndef CALLGRAM_PROFILE_HPP
#define CALLGRAM_PROFILE_HPP

#include "callgram/featurize.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace callgram {

struct ClassProfile {
    std::string class_name;
    int order = 1;
    TokenSet tokens;
    std::size_t cap = 0;
    std::size_t training_samples = 0;

    bool operator==(const ClassProfile &) const = default;
};

struct ClassificationResult {
    std::string sample_id;
    std::map<std::string, double> scores;
    std::string predicted;
    double margin = 0.0;  ///< best minus second-best score

    bool operator==(const ClassificationResult &) const = default;
};

struct SimilarityMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> column_ids;
    std::vector<double> entries;  ///< row-major

    double at(std::size_t row, std::size_t col) const { return entries[row * column_ids.size() + col]; }
};

/// |a ∩ b| / |a ∪ b|, 0 when both are empty
double jaccard(const TokenSet &a, const TokenSet &b) noexcept;

/// tokens of `doc` that are in `selected`
TokenSet filter_tokens(const TokenDocument &doc, const TokenSet &selected);

/// Builds profiles with TF-IDF computed over `train_docs`.  Profiles are
/// returned sorted by class name.  Throws UnlabeledSample, EmptyClass.
std::vector<ClassProfile> build_profiles(std::span<const TokenDocument> train_docs,
                                         const TokenSet &selected, std::size_t cap);

/// Same, ranking with caller-supplied weights (parallel to `train_docs`).
std::vector<ClassProfile> build_profiles(std::span<const TokenDocument> train_docs,
                                         std::span<const WeightedVector> weights,
                                         const TokenSet &selected, std::size_t cap);

/// Throws InsufficientClasses (< 2 profiles) or OrderMismatch.
ClassificationResult classify(const TokenDocument &doc, std::span<const ClassProfile> profiles,
                              const TokenSet &selected);

/// Throws OrderMismatch.
SimilarityMatrix similarity_matrix(std::span<const TokenDocument> docs_a,
                                   std::span<const TokenDocument> docs_b, const TokenSet &selected);

}  // namespace callgram

#endif  // CALLGRAM_PROFILE_HPP
