#include "callgram/report.hpp"

#include "callgram/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace callgram {

using json = nlohmann::json;

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// length of the well-formed UTF-8 sequence starting at `i`, or 0
std::size_t utf8_sequence_length(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        return 1;
    }
    std::size_t len = 0;
    unsigned char lo = 0x80, hi = 0xBF;
    if (b0 >= 0xC2 && b0 <= 0xDF) {
        len = 2;
    } else if (b0 == 0xE0) {
        len = 3; lo = 0xA0;
    } else if ((b0 >= 0xE1 && b0 <= 0xEC) || b0 == 0xEE || b0 == 0xEF) {
        len = 3;
    } else if (b0 == 0xED) {
        len = 3; hi = 0x9F;  // no surrogates
    } else if (b0 == 0xF0) {
        len = 4; lo = 0x90;
    } else if (b0 >= 0xF1 && b0 <= 0xF3) {
        len = 4;
    } else if (b0 == 0xF4) {
        len = 4; hi = 0x8F;
    } else {
        return 0;
    }
    if (i + len > s.size()) {
        return 0;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        const unsigned char l = (k == 1) ? lo : 0x80;
        const unsigned char h = (k == 1) ? hi : 0xBF;
        if (b < l || b > h) {
            return 0;
        }
    }
    return len;
}

std::string scalar_to_string(const json &v, const std::string &what, const std::string &sample_id) {
    switch (v.type()) {
    case json::value_t::null:
        return {};
    case json::value_t::string:
        return v.get<std::string>();
    case json::value_t::boolean:
        return v.get<bool>() ? "true" : "false";
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
    case json::value_t::number_float:
        return v.dump();
    case json::value_t::object:
    case json::value_t::array:
        return v.dump();
    default:
        throw Error{ErrorCode::MalformedReport, sample_id + ": unsupported value type for " + what};
    }
}

std::vector<std::string> flatten_arguments(const json &args, const std::string &sample_id) {
    std::vector<std::string> out;
    if (args.is_null()) {
        return out;
    }
    if (args.is_array()) {
        for (const auto &a : args) {
            out.push_back(scalar_to_string(a, "argument", sample_id));
        }
        return out;
    }
    if (args.is_object()) {
        // nlohmann objects iterate in key order
        for (const auto &[name, value] : args.items()) {
            out.push_back(scalar_to_string(value, "argument " + name, sample_id));
        }
        return out;
    }
    throw Error{ErrorCode::MalformedReport, sample_id + ": \"arguments\" must be an object or array"};
}

const json *member(const json &object, const char *key) {
    auto it = object.find(key);
    return it == object.end() ? nullptr : &*it;
}

std::vector<std::string> split_csv_line(const std::string &line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) {
        throw Error{ErrorCode::ManifestError, "line " + std::to_string(line_no) + ": unterminated quote"};
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string trim(std::string_view s) {
    auto b = s.begin();
    auto e = s.end();
    while (b != e && is_space(*b)) ++b;
    while (e != b && is_space(*(e - 1))) --e;
    return std::string{b, e};
}

// identifiers end up in CSV columns, file names and model headers
void check_identifier(const std::string &value, const std::string &what, bool allow_empty) {
    if (value.empty()) {
        if (allow_empty) return;
        throw Error{ErrorCode::ManifestError, what + " must not be empty"};
    }
    for (char c : value) {
        if (is_space(c) || c == ',' || c == '/' || c == '\\' || c == '"') {
            throw Error{ErrorCode::ManifestError,
                        what + " \"" + value + "\" contains whitespace, ',', '\"' or a path separator"};
        }
    }
}

Split parse_split(const std::string &tag) {
    if (tag == "train") return Split::Train;
    if (tag == "test") return Split::Test;
    throw Error{ErrorCode::ManifestError, "unknown split tag \"" + tag + "\" (expected train or test)"};
}

}  // namespace

std::string sanitize_utf8(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        const std::size_t len = utf8_sequence_length(bytes, i);
        if (len == 0) {
            out.append(substitution_mark);
            ++i;
        } else {
            out.append(bytes.substr(i, len));
            i += len;
        }
    }
    return out;
}

std::string normalize_api_name(std::string_view name) {
    std::string out;
    bool pending_space = false;
    for (char c : name) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back('_');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

BehaviorReport parse_report(std::string_view raw_bytes, const std::string &sample_id) {
    json doc;
    try {
        doc = json::parse(sanitize_utf8(raw_bytes));
    } catch (const json::exception &e) {
        throw Error{ErrorCode::MalformedReport, sample_id + ": " + e.what()};
    }
    if (!doc.is_object()) {
        throw Error{ErrorCode::MalformedReport, sample_id + ": top-level value is not an object"};
    }

    BehaviorReport report;
    report.sample_id = sample_id;

    const json *behavior = member(doc, "behavior");
    const json *processes = nullptr;
    if (behavior != nullptr && !behavior->is_null()) {
        if (!behavior->is_object()) {
            throw Error{ErrorCode::MalformedReport, sample_id + ": \"behavior\" is not an object"};
        }
        processes = member(*behavior, "processes");
    }
    if (processes != nullptr && !processes->is_null()) {
        if (!processes->is_array()) {
            throw Error{ErrorCode::MalformedReport, sample_id + ": \"processes\" is not an array"};
        }
        for (const auto &process : *processes) {
            if (!process.is_object()) {
                throw Error{ErrorCode::MalformedReport, sample_id + ": process entry is not an object"};
            }
            const json *calls = member(process, "calls");
            if (calls == nullptr || calls->is_null()) {
                continue;
            }
            if (!calls->is_array()) {
                throw Error{ErrorCode::MalformedReport, sample_id + ": \"calls\" is not an array"};
            }
            for (const auto &call : *calls) {
                if (!call.is_object()) {
                    throw Error{ErrorCode::MalformedReport, sample_id + ": call entry is not an object"};
                }
                const json *api = member(call, "api");
                std::string name;
                if (api != nullptr && api->is_string()) {
                    name = normalize_api_name(api->get_ref<const std::string &>());
                }
                if (name.empty()) {
                    ++report.dropped_calls;
                    continue;
                }
                ApiCallRecord record;
                record.api_name = std::move(name);
                if (const json *cat = member(call, "category")) {
                    record.category = scalar_to_string(*cat, "category", sample_id);
                }
                if (const json *args = member(call, "arguments")) {
                    record.arguments = flatten_arguments(*args, sample_id);
                }
                if (const json *ret = member(call, "return")) {
                    record.return_value = scalar_to_string(*ret, "return", sample_id);
                }
                report.calls.push_back(std::move(record));
            }
        }
    }
    if (report.calls.empty()) {
        throw Error{ErrorCode::EmptyReport, sample_id + ": no usable calls"};
    }
    return report;
}

std::string dump_report(const BehaviorReport &report) {
    json calls = json::array();
    for (const auto &c : report.calls) {
        calls.push_back(json{{"category", c.category},
                             {"api", c.api_name},
                             {"arguments", c.arguments},
                             {"return", c.return_value}});
    }
    json doc = {{"behavior", {{"processes", json::array({json{{"calls", std::move(calls)}}})}}}};
    return doc.dump(1) + "\n";
}

std::string_view to_string(Split split) noexcept {
    return split == Split::Train ? "train" : "test";
}

std::vector<const ManifestEntry *> CorpusManifest::with_split(Split split) const {
    std::vector<const ManifestEntry *> out;
    for (const auto &e : entries) {
        if (e.split == split) {
            out.push_back(&e);
        }
    }
    return out;
}

CorpusManifest load_manifest(const std::filesystem::path &manifest_path) {
    std::string text;
    try {
        text = read_file(manifest_path);
    } catch (const Error &e) {
        throw Error{ErrorCode::ManifestError, e.what()};
    }
    if (text.rfind("\xEF\xBB\xBF", 0) == 0) {
        text.erase(0, 3);
    }
    const auto base = manifest_path.parent_path();

    struct Row {
        std::string path, sample_id, label, split;
    };
    std::vector<Row> rows;

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::exception &e) {
            throw Error{ErrorCode::ManifestError, manifest_path.string() + ": " + e.what()};
        }
        for (const auto &obj : doc) {
            if (!obj.is_object()) {
                throw Error{ErrorCode::ManifestError, "manifest array element is not an object"};
            }
            auto field = [&](const char *key, bool required) -> std::string {
                auto it = obj.find(key);
                if (it == obj.end() || it->is_null()) {
                    if (required) {
                        throw Error{ErrorCode::ManifestError, std::string{"missing key \""} + key + "\""};
                    }
                    return {};
                }
                if (!it->is_string()) {
                    throw Error{ErrorCode::ManifestError, std::string{"key \""} + key + "\" is not a string"};
                }
                return it->get<std::string>();
            };
            rows.push_back({field("path", true), field("sample_id", true), field("label", false),
                            field("split", true)});
        }
    } else {
        std::istringstream in{text};
        std::string line;
        std::size_t line_no = 0;
        bool header_seen = false;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            auto fields = split_csv_line(line, line_no);
            if (!header_seen) {
                for (auto &f : fields) f = trim(f);
                if (fields != std::vector<std::string>{"path", "sample_id", "label", "split"}) {
                    throw Error{ErrorCode::ManifestError, "expected header path,sample_id,label,split"};
                }
                header_seen = true;
                continue;
            }
            if (fields.size() != 4) {
                throw Error{ErrorCode::ManifestError,
                            "line " + std::to_string(line_no) + ": expected 4 fields, got " +
                                std::to_string(fields.size())};
            }
            rows.push_back({fields[0], trim(fields[1]), trim(fields[2]), trim(fields[3])});
        }
        if (!header_seen) {
            throw Error{ErrorCode::ManifestError, manifest_path.string() + ": missing header"};
        }
    }

    CorpusManifest manifest;
    std::set<std::string> seen;
    for (auto &r : rows) {
        check_identifier(r.sample_id, "sample_id", false);
        check_identifier(r.label, "label", true);
        if (!seen.insert(r.sample_id).second) {
            throw Error{ErrorCode::ManifestError, "duplicate sample_id \"" + r.sample_id + "\""};
        }
        ManifestEntry e;
        e.path = std::filesystem::path{r.path};
        if (e.path.is_relative()) {
            e.path = base / e.path;
        }
        e.sample_id = std::move(r.sample_id);
        e.label = std::move(r.label);
        e.split = parse_split(r.split);
        std::ifstream probe{e.path, std::ios::binary};
        if (!probe || std::filesystem::is_directory(e.path)) {
            throw Error{ErrorCode::ManifestError, "unreadable report file " + e.path.string()};
        }
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

void write_manifest(const CorpusManifest &manifest, const std::filesystem::path &manifest_path) {
    const auto base = manifest_path.parent_path();
    std::ostringstream out;
    out << "path,sample_id,label,split\n";
    for (const auto &e : manifest.entries) {
        std::string p = e.path.generic_string();
        if (!base.empty()) {
            auto rel = e.path.lexically_relative(base);
            if (!rel.empty() && rel.native().rfind("..", 0) != 0) {
                p = rel.generic_string();
            }
        }
        if (p.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char c : p) {
                if (c == '"') q += '"';
                q += c;
            }
            p = q + "\"";
        }
        out << p << ',' << e.sample_id << ',' << e.label << ',' << to_string(e.split) << '\n';
    }
    write_file_atomic(manifest_path, out.str());
}

ClassCounts LoadStatistics::totals() const {
    ClassCounts t;
    for (const auto &[_, c] : per_class) {
        t.train += c.train;
        t.test += c.test;
    }
    return t;
}

const ClassCounts *LoadStatistics::find(std::string_view label) const {
    for (const auto &[name, c] : per_class) {
        if (name == label) return &c;
    }
    return nullptr;
}

std::string LoadStatistics::table() const {
    std::size_t width = 5;
    for (const auto &[name, _] : per_class) width = std::max(width, name.size());
    std::ostringstream out;
    auto row = [&](const std::string &name, auto train, auto test, auto total) {
        out << std::left << std::setw(static_cast<int>(width)) << name << std::right << "  "
            << std::setw(8) << train << "  " << std::setw(8) << test << "  " << std::setw(8) << total
            << '\n';
    };
    row("Type", "Train", "Test", "Total");
    for (const auto &[name, c] : per_class) {
        row(name.empty() ? std::string{"(none)"} : name, c.train, c.test, c.train + c.test);
    }
    const auto t = totals();
    row("Total", t.train, t.test, t.train + t.test);
    return out.str();
}

LoadStatistics manifest_statistics(const CorpusManifest &manifest) {
    LoadStatistics stats;
    for (const auto &e : manifest.entries) {
        auto it = std::find_if(stats.per_class.begin(), stats.per_class.end(),
                               [&](const auto &row) { return row.first == e.label; });
        if (it == stats.per_class.end()) {
            stats.per_class.emplace_back(e.label, ClassCounts{});
            it = std::prev(stats.per_class.end());
        }
        (e.split == Split::Train ? it->second.train : it->second.test) += 1;
    }
    return stats;
}

BehaviorReport load_report(const ManifestEntry &entry) {
    auto report = parse_report(read_file(entry.path), entry.sample_id);
    if (!entry.label.empty()) {
        report.label = entry.label;
    }
    report.source_path = entry.path.string();
    return report;
}

LoadedCorpus load_corpus(const std::filesystem::path &manifest_path) {
    const auto manifest = load_manifest(manifest_path);
    LoadedCorpus corpus;
    corpus.stats = manifest_statistics(manifest);
    corpus.reports.reserve(manifest.entries.size());
    for (const auto &e : manifest.entries) {
        corpus.reports.push_back(load_report(e));
        corpus.stats.dropped_calls += corpus.reports.back().dropped_calls;
        corpus.stats.total_calls += corpus.reports.back().calls.size();
    }
    return corpus;
}

void for_each_report(std::span<const ManifestEntry *const> entries,
                     const std::function<void(const ManifestEntry &, BehaviorReport &&)> &visit) {
    for (const ManifestEntry *e : entries) {
        visit(*e, load_report(*e));
    }
}

}  // namespace callgram
