#include "callgram/profile.hpp"

#include "callgram/error.hpp"

#include <algorithm>

namespace callgram {

double jaccard(const TokenSet &a, const TokenSet &b) noexcept {
    const TokenSet &small = a.size() <= b.size() ? a : b;
    const TokenSet &large = a.size() <= b.size() ? b : a;
    std::size_t common = 0;
    for (const auto &t : small) {
        if (large.contains(t)) ++common;
    }
    const std::size_t all = a.size() + b.size() - common;
    return all == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(all);
}

TokenSet filter_tokens(const TokenDocument &doc, const TokenSet &selected) {
    TokenSet out;
    for (const auto &[t, _] : doc.counts) {
        if (selected.contains(t)) out.insert(out.end(), t);
    }
    return out;
}

std::vector<ClassProfile> build_profiles(std::span<const TokenDocument> train_docs,
                                         const TokenSet &selected, std::size_t cap) {
    if (train_docs.empty()) {
        throw Error{ErrorCode::EmptyCorpus, "no training documents"};
    }
    const auto weights = tfidf(train_docs);
    return build_profiles(train_docs, weights, selected, cap);
}

std::vector<ClassProfile> build_profiles(std::span<const TokenDocument> train_docs,
                                         std::span<const WeightedVector> weights,
                                         const TokenSet &selected, std::size_t cap) {
    if (cap < 1) {
        throw Error{ErrorCode::UsageError, "profile cap must be >= 1"};
    }
    if (weights.size() != train_docs.size()) {
        throw Error{ErrorCode::UsageError, "weights do not line up with training documents"};
    }
    struct Accumulator {
        int order = 0;
        std::size_t samples = 0;
        std::map<std::string, double> mass;  // class-summed weight of selected tokens
    };
    std::map<std::string, Accumulator> classes;
    for (std::size_t i = 0; i < train_docs.size(); ++i) {
        const auto &doc = train_docs[i];
        if (doc.label.empty()) {
            throw Error{ErrorCode::UnlabeledSample, doc.sample_id + ": training sample has no label"};
        }
        auto &acc = classes[doc.label];
        if (acc.samples > 0 && acc.order != doc.order) {
            throw Error{ErrorCode::OrderMismatch, doc.sample_id + ": mixed n-gram orders in training set"};
        }
        acc.order = doc.order;
        ++acc.samples;
        for (const auto &[t, _] : doc.counts) {
            if (!selected.contains(t)) continue;
            auto w = weights[i].weights.find(t);
            acc.mass[t] += (w == weights[i].weights.end()) ? 0.0 : w->second;
        }
    }

    std::vector<ClassProfile> profiles;
    profiles.reserve(classes.size());
    for (auto &[name, acc] : classes) {
        if (acc.mass.empty()) {
            throw Error{ErrorCode::EmptyClass, "class \"" + name + "\" has no selected tokens"};
        }
        ClassProfile p;
        p.class_name = name;
        p.order = acc.order;
        p.cap = cap;
        p.training_samples = acc.samples;
        if (acc.mass.size() <= cap) {
            for (const auto &[t, _] : acc.mass) p.tokens.insert(p.tokens.end(), t);
        } else {
            std::vector<std::pair<double, const std::string *>> ranked;
            ranked.reserve(acc.mass.size());
            for (const auto &[t, m] : acc.mass) ranked.emplace_back(m, &t);
            std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(cap), ranked.end(),
                              [](const auto &a, const auto &b) {
                                  if (a.first != b.first) return a.first > b.first;
                                  return *a.second < *b.second;
                              });
            for (std::size_t k = 0; k < cap; ++k) p.tokens.insert(*ranked[k].second);
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

ClassificationResult classify(const TokenDocument &doc, std::span<const ClassProfile> profiles,
                              const TokenSet &selected) {
    if (profiles.size() < 2) {
        throw Error{ErrorCode::InsufficientClasses, "classification needs at least 2 class profiles"};
    }
    for (const auto &p : profiles) {
        if (p.order != doc.order) {
            throw Error{ErrorCode::OrderMismatch,
                        doc.sample_id + ": document order " + std::to_string(doc.order) +
                            " vs profile order " + std::to_string(p.order)};
        }
    }
    const TokenSet evidence = filter_tokens(doc, selected);

    ClassificationResult r;
    r.sample_id = doc.sample_id;
    for (const auto &p : profiles) r.scores[p.class_name] = jaccard(evidence, p.tokens);

    // map order is lexicographic, so strict '>' keeps the first of tied classes
    double best = -1.0;
    double second = -1.0;
    for (const auto &[name, s] : r.scores) {
        if (s > best) {
            second = best;
            best = s;
            r.predicted = name;
        } else if (s > second) {
            second = s;
        }
    }
    r.margin = best - second;
    return r;
}

SimilarityMatrix similarity_matrix(std::span<const TokenDocument> docs_a,
                                   std::span<const TokenDocument> docs_b, const TokenSet &selected) {
    const int order = !docs_a.empty() ? docs_a.front().order : (!docs_b.empty() ? docs_b.front().order : 1);
    auto prepare = [&](std::span<const TokenDocument> docs, std::vector<std::string> &ids) {
        std::vector<TokenSet> sets;
        sets.reserve(docs.size());
        for (const auto &d : docs) {
            if (d.order != order) {
                throw Error{ErrorCode::OrderMismatch, d.sample_id + ": mixed n-gram orders"};
            }
            ids.push_back(d.sample_id);
            sets.push_back(filter_tokens(d, selected));
        }
        return sets;
    };
    SimilarityMatrix m;
    const auto rows = prepare(docs_a, m.row_ids);
    const auto cols = prepare(docs_b, m.column_ids);
    m.entries.reserve(rows.size() * cols.size());
    for (const auto &r : rows) {
        for (const auto &c : cols) m.entries.push_back(jaccard(r, c));
    }
    return m;
}

}  // namespace callgram
