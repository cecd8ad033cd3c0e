#include "callgram/featurize.hpp"

#include "callgram/error.hpp"
#include "callgram/hashing.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace callgram {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_utf8_continuation(char c) {
    return (static_cast<unsigned char>(c) & 0xC0) == 0x80;
}

// Api names keep their underscores (DnsQuery_W); only the n-gram joiner
// and the escape character itself are escaped.
std::string encode_api_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        if (c == '\\' || c == ',') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::size_t TokenDocument::total() const noexcept {
    std::size_t n = 0;
    for (const auto &[_, c] : counts) n += c;
    return n;
}

TokenSet TokenDocument::token_set() const {
    TokenSet out;
    for (const auto &[t, _] : counts) out.insert(out.end(), t);
    return out;
}

void TokenDocument::drop_sequence() {
    std::vector<std::string>{}.swap(tokens);
}

std::string encode_argument(std::string_view value) {
    std::string_view kept = value;
    std::string suffix;
    if (value.size() > max_argument_length) {
        std::size_t cut = max_argument_length;
        while (cut > 0 && is_utf8_continuation(value[cut])) --cut;
        kept = value.substr(0, cut);
        suffix = "~" + hex8(fnv1a32(value));
    }

    std::string out;
    out.reserve(kept.size() + suffix.size());
    bool pending_space = false;
    for (char c : kept) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back('_');
            pending_space = false;
        }
        if (c == '\\' || c == '_' || c == ',') out.push_back('\\');
        out.push_back(c);
    }
    out += suffix;
    return out;
}

std::string tokenize_call(const ApiCallRecord &call) {
    std::string token = encode_api_name(call.api_name);
    if (call.arguments.empty()) {
        token += "_na";
        return token;
    }
    for (const auto &arg : call.arguments) {
        token.push_back('_');
        token += encode_argument(arg);
    }
    return token;
}

TokenDocument ngrams(const BehaviorReport &report, int order) {
    if (order < min_order || order > max_order) {
        throw Error{ErrorCode::BadOrder, "n-gram order " + std::to_string(order) + " not in {1,2,3}"};
    }
    TokenDocument doc;
    doc.sample_id = report.sample_id;
    doc.label = report.label.value_or("");
    doc.order = order;

    std::vector<std::string> unigrams;
    unigrams.reserve(report.calls.size());
    for (const auto &call : report.calls) unigrams.push_back(tokenize_call(call));

    const auto n = static_cast<std::size_t>(order);
    if (unigrams.size() < n) {
        return doc;
    }
    doc.tokens.reserve(unigrams.size() - n + 1);
    for (std::size_t i = 0; i + n <= unigrams.size(); ++i) {
        std::string gram = unigrams[i];
        for (std::size_t k = 1; k < n; ++k) {
            gram.push_back(',');
            gram += unigrams[i + k];
        }
        ++doc.counts[gram];
        doc.tokens.push_back(std::move(gram));
    }
    return doc;
}

WeightedVector term_frequency(const TokenDocument &doc) {
    const std::size_t total = doc.total();
    if (total == 0) {
        throw Error{ErrorCode::EmptyDocument, doc.sample_id + ": no tokens"};
    }
    WeightedVector v;
    v.sample_id = doc.sample_id;
    v.scheme = WeightScheme::TF;
    const auto denom = static_cast<double>(total);
    for (const auto &[t, c] : doc.counts) {
        v.weights.emplace_hint(v.weights.end(), t, static_cast<double>(c) / denom);
    }
    return v;
}

double smoothed_idf(std::size_t n_docs, std::size_t df) noexcept {
    return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

std::map<std::string, std::size_t> document_frequencies(std::span<const TokenDocument> docs) {
    std::map<std::string, std::size_t> df;
    for (const auto &d : docs) {
        for (const auto &[t, _] : d.counts) ++df[t];
    }
    return df;
}

std::vector<WeightedVector> tfidf(std::span<const TokenDocument> docs) {
    if (docs.empty()) {
        throw Error{ErrorCode::EmptyCorpus, "tf-idf needs at least one document"};
    }
    for (const auto &d : docs) {
        if (d.order != docs.front().order) {
            throw Error{ErrorCode::OrderMismatch, "documents of mixed n-gram order"};
        }
    }
    // df aggregation completes before any weighting
    const auto df = document_frequencies(docs);
    std::map<std::string, double> idf;
    for (const auto &[t, n] : df) idf.emplace_hint(idf.end(), t, smoothed_idf(docs.size(), n));

    std::vector<WeightedVector> out;
    out.reserve(docs.size());
    for (const auto &d : docs) {
        WeightedVector v;
        v.sample_id = d.sample_id;
        v.scheme = WeightScheme::TFIDF;
        const auto total = static_cast<double>(d.total());
        for (const auto &[t, c] : d.counts) {
            v.weights.emplace_hint(v.weights.end(), t, static_cast<double>(c) / total * idf.at(t));
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::string dump_token_document(const TokenDocument &doc) {
    std::string out = "#" + doc.sample_id + " " + std::to_string(doc.order) + " " +
                      std::to_string(doc.tokens.size()) + "\n";
    for (const auto &t : doc.tokens) {
        out += t;
        out.push_back('\n');
    }
    return out;
}

TokenDocument parse_token_document(std::string_view text) {
    const auto eol = text.find('\n');
    if (text.empty() || text.front() != '#' || eol == std::string_view::npos) {
        throw Error{ErrorCode::MalformedReport, "token document lacks a header line"};
    }
    std::istringstream header{std::string{text.substr(1, eol - 1)}};
    TokenDocument doc;
    std::size_t count = 0;
    if (!(header >> doc.sample_id >> doc.order >> count)) {
        throw Error{ErrorCode::MalformedReport, "bad token document header"};
    }
    if (doc.order < min_order || doc.order > max_order) {
        throw Error{ErrorCode::BadOrder, "token document order " + std::to_string(doc.order)};
    }
    std::size_t pos = eol + 1;
    while (pos < text.size()) {
        auto next = text.find('\n', pos);
        if (next == std::string_view::npos) next = text.size();
        std::string token{text.substr(pos, next - pos)};
        ++doc.counts[token];
        doc.tokens.push_back(std::move(token));
        pos = next + 1;
    }
    if (doc.tokens.size() != count) {
        throw Error{ErrorCode::MalformedReport, doc.sample_id + ": token count does not match header"};
    }
    return doc;
}

}  // namespace callgram
