#include "callgram/persistence.hpp"

#include "callgram/error.hpp"
#include "callgram/hashing.hpp"
#include "callgram/io.hpp"

#include <charconv>
#include <set>

namespace callgram {

namespace {

constexpr std::string_view magic = "callgram-model";
constexpr std::string_view digest_prefix = "digest sha256 ";

[[noreturn]] void corrupt(const std::string &what) {
    throw Error{ErrorCode::IntegrityError, "model file: " + what};
}

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_{text} {}

    bool done() const { return pos_ >= text_.size(); }

    std::string_view next() {
        if (done()) corrupt("unexpected end of data");
        const auto nl = text_.find('\n', pos_);
        if (nl == std::string_view::npos) corrupt("unterminated line");
        auto line = text_.substr(pos_, nl - pos_);
        pos_ = nl + 1;
        return line;
    }

    /// "<key> <value>" -> value
    std::string_view field(std::string_view key) {
        auto line = next();
        if (line.size() <= key.size() || line.substr(0, key.size()) != key || line[key.size()] != ' ') {
            corrupt("expected field '" + std::string{key} + "'");
        }
        return line.substr(key.size() + 1);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

std::size_t parse_count(std::string_view s) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) corrupt("bad integer '" + std::string{s} + "'");
    return v;
}

double parse_double(std::string_view s) {
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) corrupt("bad number '" + std::string{s} + "'");
    return v;
}

void check_token(const std::string &t) {
    if (t.empty() || t.find('\n') != std::string::npos) {
        throw Error{ErrorCode::UsageError, "token cannot be stored: empty or contains a newline"};
    }
}

}  // namespace

std::vector<std::string> Model::class_names() const {
    std::vector<std::string> out;
    out.reserve(profiles.size());
    for (const auto &p : profiles) out.push_back(p.class_name);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string vocab_digest(const TokenSet &vocab) {
    std::string bytes;
    for (const auto &t : vocab) {
        bytes += t;
        bytes += '\n';
    }
    return sha256_hex(bytes);
}

std::string serialize_model(const Model &model) {
    if (model.profiles.empty()) {
        throw Error{ErrorCode::UsageError, "cannot save a model without class profiles"};
    }
    std::string out;
    auto line = [&out](std::string_view key, const std::string &value) {
        out.append(key);
        out += ' ';
        out += value;
        out += '\n';
    };
    line(magic, std::to_string(model.format_version));
    line("generator", model.generator);
    line("order", std::to_string(model.order));
    line("min_df", std::to_string(model.selection.min_df));
    line("max_df_fraction", format_double(model.selection.max_df_fraction));
    line("top_k", std::to_string(model.selection.top_k));
    line("profile_cap", std::to_string(model.profile_cap));
    line("training_samples", std::to_string(model.training_samples));
    line("vocab_sha256", vocab_digest(model.vocab));
    line("classes", std::to_string(model.profiles.size()));

    line("vocab", std::to_string(model.vocab.size()));
    for (const auto &t : model.vocab) {
        check_token(t);
        out += t;
        out += '\n';
    }

    std::set<std::string> seen;
    for (const auto &p : model.profiles) {
        if (!seen.insert(p.class_name).second) {
            throw Error{ErrorCode::UsageError, "duplicate class profile " + p.class_name};
        }
        line("class", p.class_name + " " + std::to_string(p.training_samples) + " " + std::to_string(p.tokens.size()));
        for (const auto &t : p.tokens) {
            check_token(t);
            out += t;
            out += '\n';
        }
    }
    out += "end\n";
    const std::string digest = sha256_hex(out);
    out += digest_prefix;
    out += digest;
    out += '\n';
    return out;
}

Model parse_model(std::string_view bytes) {
    // version first, so a newer layout is reported as such rather than as damage
    const auto first_nl = bytes.find('\n');
    const auto header = bytes.substr(0, first_nl == std::string_view::npos ? bytes.size() : first_nl);
    if (header.size() <= magic.size() || header.substr(0, magic.size()) != magic || header[magic.size()] != ' ') {
        corrupt("not a callgram model");
    }
    int version = 0;
    {
        const auto v = header.substr(magic.size() + 1);
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), version);
        if (ec != std::errc{} || p != v.data() + v.size() || version < 1) corrupt("bad format version");
    }
    if (version > model_format_version) {
        throw Error{ErrorCode::VersionError, "model format version " + std::to_string(version) +
                                                 " is newer than supported version " +
                                                 std::to_string(model_format_version)};
    }

    const auto digest_pos = bytes.rfind(digest_prefix);
    if (digest_pos == std::string_view::npos || (digest_pos > 0 && bytes[digest_pos - 1] != '\n')) {
        corrupt("missing digest line (truncated?)");
    }
    auto stored = bytes.substr(digest_pos + digest_prefix.size());
    if (stored.size() != 65 || stored.back() != '\n') corrupt("malformed digest line");
    stored.remove_suffix(1);
    const auto body = bytes.substr(0, digest_pos);
    if (sha256_hex(body) != stored) corrupt("digest mismatch");

    Model m;
    LineReader in{body};
    in.next();
    m.format_version = version;
    m.generator = std::string{in.field("generator")};
    m.order = static_cast<int>(parse_count(in.field("order")));
    m.selection.min_df = parse_count(in.field("min_df"));
    m.selection.max_df_fraction = parse_double(in.field("max_df_fraction"));
    m.selection.top_k = parse_count(in.field("top_k"));
    m.profile_cap = parse_count(in.field("profile_cap"));
    m.training_samples = parse_count(in.field("training_samples"));
    const std::string vocab_sha{in.field("vocab_sha256")};
    const std::size_t n_classes = parse_count(in.field("classes"));

    const std::size_t n_vocab = parse_count(in.field("vocab"));
    std::string prev;
    for (std::size_t i = 0; i < n_vocab; ++i) {
        std::string t{in.next()};
        if (t.empty() || (i > 0 && !(prev < t))) corrupt("vocabulary not sorted or has blanks");
        m.vocab.insert(m.vocab.end(), t);
        prev = std::move(t);
    }
    if (vocab_digest(m.vocab) != vocab_sha) corrupt("vocabulary digest mismatch");

    for (std::size_t c = 0; c < n_classes; ++c) {
        const auto head = in.field("class");
        const auto s1 = head.find(' ');
        const auto s2 = head.find(' ', s1 == std::string_view::npos ? s1 : s1 + 1);
        if (s1 == std::string_view::npos || s2 == std::string_view::npos) corrupt("bad class header");
        ClassProfile p;
        p.class_name = std::string{head.substr(0, s1)};
        p.training_samples = parse_count(head.substr(s1 + 1, s2 - s1 - 1));
        const std::size_t n_tokens = parse_count(head.substr(s2 + 1));
        p.order = m.order;
        p.cap = m.profile_cap;
        if (!m.profiles.empty() && !(m.profiles.back().class_name < p.class_name)) corrupt("classes not sorted");
        for (std::size_t i = 0; i < n_tokens; ++i) {
            std::string t{in.next()};
            if (!m.vocab.contains(t)) corrupt("profile token outside vocabulary");
            if (!p.tokens.empty() && !(*p.tokens.rbegin() < t)) corrupt("profile tokens not sorted");
            p.tokens.insert(p.tokens.end(), std::move(t));
        }
        m.profiles.push_back(std::move(p));
    }
    if (in.next() != "end" || !in.done()) corrupt("unexpected trailing data");
    if (m.profiles.empty()) corrupt("no class profiles");
    return m;
}

void save_model(const Model &model, const std::filesystem::path &path) {
    write_file_atomic(path, serialize_model(model));
}

Model load_model(const std::filesystem::path &path) {
    return parse_model(read_file(path));
}

std::string serialize_vocabulary(const TokenSet &vocab, int order, const SelectionParams &params) {
    std::string out = "# callgram-vocab order=" + std::to_string(order) + " min_df=" + std::to_string(params.min_df) +
                      " max_df_fraction=" + format_double(params.max_df_fraction) +
                      " top_k=" + std::to_string(params.top_k) + " size=" + std::to_string(vocab.size()) +
                      " sha256=" + vocab_digest(vocab) + "\n";
    for (const auto &t : vocab) {
        check_token(t);
        out += t;
        out += '\n';
    }
    return out;
}

void save_vocabulary(const TokenSet &vocab, int order, const SelectionParams &params,
                     const std::filesystem::path &path) {
    write_file_atomic(path, serialize_vocabulary(vocab, order, params));
}

}  // namespace callgram
