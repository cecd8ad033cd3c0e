// evaluate.hpp
//
// Confusion matrix and classification metrics.  Per-class figures are
// one-vs-rest; aggregate F1 is the unweighted (macro) mean; MCC is the
// multiclass covariance form
//
//   MCC = (c*s - sum_k p_k*t_k) / sqrt((s^2 - sum_k p_k^2) * (s^2 - sum_k t_k^2))
//
// with c the trace, s the total, p_k the column (predicted) sums and t_k the
// row (true) sums.  Any zero denominator yields 0 and sets a flag.

#ifndef CALLGRAM_EVALUATE_HPP
#define CALLGRAM_EVALUATE_HPP

#include "callgram/profile.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace callgram {

struct ConfusionMatrix {
    std::vector<std::string> classes;              ///< row and column order
    std::vector<std::vector<std::int64_t>> counts;  ///< [true][predicted]

    std::int64_t total() const noexcept;
    std::int64_t trace() const noexcept;
    std::size_t index_of(const std::string &name) const;  ///< throws std::out_of_range
    /// reorders rows and columns; `order` must be a permutation of `classes`
    ConfusionMatrix permuted(const std::vector<std::string> &order) const;
};

struct ClassMetrics {
    std::string name;
    std::int64_t support = 0;  ///< true instances
    double accuracy = 0.0;     ///< one-vs-rest (TP + TN) / total
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double mcc = 0.0;
    bool mcc_undefined = false;
    std::int64_t total = 0;
};

/// Class order is the sorted union of true and predicted labels.  Throws
/// MissingTruth.
ConfusionMatrix confusion(std::span<const ClassificationResult> results,
                          const std::map<std::string, std::string> &truth);

/// Same with an explicit class order; labels outside it are appended sorted.
ConfusionMatrix confusion(std::span<const ClassificationResult> results,
                          const std::map<std::string, std::string> &truth,
                          std::vector<std::string> class_order);

/// Throws EmptyMatrix.
MetricsReport metrics(const ConfusionMatrix &cm);

std::string metrics_json(const ConfusionMatrix &cm, const MetricsReport &m);
std::string metrics_table(const ConfusionMatrix &cm, const MetricsReport &m);
std::string confusion_csv(const ConfusionMatrix &cm);

}  // namespace callgram

#endif  // CALLGRAM_EVALUATE_HPP
