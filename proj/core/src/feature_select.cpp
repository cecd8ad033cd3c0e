#include "callgram/feature_select.hpp"

#include "callgram/error.hpp"

#include <algorithm>
#include <map>

namespace callgram {

void SelectionParams::validate() const {
    if (min_df < 1) {
        throw Error{ErrorCode::UsageError, "min_df must be >= 1"};
    }
    if (!(max_df_fraction > 0.0 && max_df_fraction <= 1.0)) {
        throw Error{ErrorCode::UsageError, "max_df_fraction must lie in (0, 1]"};
    }
    if (top_k < 1) {
        throw Error{ErrorCode::UsageError, "top_k must be >= 1"};
    }
}

Selection select_features(std::span<const TokenDocument> docs, const SelectionParams &params) {
    params.validate();
    if (docs.empty()) {
        throw Error{ErrorCode::EmptyCorpus, "feature selection needs at least one document"};
    }
    const auto df = document_frequencies(docs);
    const auto n_docs = static_cast<double>(docs.size());

    Selection out;
    out.report.vocab_before = df.size();

    std::vector<std::string> survivors;
    survivors.reserve(df.size());
    std::size_t removed = 0;
    for (const auto &[t, n] : df) {
        if (n < params.min_df) {
            ++removed;
        } else {
            survivors.push_back(t);
        }
    }
    out.report.rules_applied.emplace_back("min_df", removed);

    removed = 0;
    std::erase_if(survivors, [&](const std::string &t) {
        const bool drop = static_cast<double>(df.at(t)) / n_docs > params.max_df_fraction;
        removed += drop ? 1 : 0;
        return drop;
    });
    out.report.rules_applied.emplace_back("max_df_fraction", removed);

    removed = 0;
    if (survivors.size() > params.top_k) {
        std::map<std::string, double> mass;
        for (const auto &t : survivors) mass.emplace_hint(mass.end(), t, 0.0);
        for (const auto &v : tfidf(docs)) {
            for (const auto &[t, w] : v.weights) {
                if (auto it = mass.find(t); it != mass.end()) it->second += w;
            }
        }
        std::vector<std::pair<double, std::string>> ranked;
        ranked.reserve(mass.size());
        for (const auto &[t, m] : mass) ranked.emplace_back(m, t);
        std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        removed = ranked.size() - params.top_k;
        ranked.resize(params.top_k);
        survivors.clear();
        for (auto &[_, t] : ranked) survivors.push_back(std::move(t));
    }
    out.report.rules_applied.emplace_back("top_k", removed);

    if (survivors.empty()) {
        throw Error{ErrorCode::EmptySelection,
                    "every token was eliminated (vocabulary " + std::to_string(df.size()) +
                        "); relax min_df / max_df_fraction"};
    }
    out.selected.insert(survivors.begin(), survivors.end());
    out.report.vocab_after = out.selected.size();
    out.report.kept_fraction =
        static_cast<double>(out.report.vocab_after) / static_cast<double>(out.report.vocab_before);
    return out;
}

}  // namespace callgram
