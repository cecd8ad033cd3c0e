#include "app.hpp"

#include "callgram/error.hpp"
#include "callgram/evaluate.hpp"
#include "callgram/featurize.hpp"
#include "callgram/io.hpp"
#include "callgram/parallel.hpp"
#include "callgram/persistence.hpp"
#include "callgram/report.hpp"
#include "callgram/synth.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <ostream>
#include <set>

namespace callgram::app {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view echo_format = "callgram-run 1";

const std::array<std::string_view, 7> subcommands = {"synth", "featurize", "select", "train",
                                                     "classify", "evaluate", "export-images"};

[[noreturn]] void usage(const std::string &msg) {
    throw Error{ErrorCode::UsageError, msg};
}

fs::path absolute_path(const fs::path &p) {
    return p.empty() ? p : fs::absolute(p).lexically_normal();
}

bool uses(const RunConfig &c, std::initializer_list<std::string_view> names) {
    return std::find(names.begin(), names.end(), c.subcommand) != names.end();
}

std::vector<const ManifestEntry *> pick(const CorpusManifest &m, SplitFilter filter) {
    if (filter == SplitFilter::Train) return m.with_split(Split::Train);
    if (filter == SplitFilter::Test) return m.with_split(Split::Test);
    std::vector<const ManifestEntry *> all;
    for (const auto &e : m.entries) all.push_back(&e);
    return all;
}

struct Featurized {
    std::vector<TokenDocument> docs;
    std::size_t dropped_calls = 0;
    std::size_t total_calls = 0;
};

// Reports are parsed and reduced to token counts one at a time; the
// per-index slots keep the result independent of scheduling.
Featurized featurize_entries(const std::vector<const ManifestEntry *> &entries, int order, unsigned jobs,
                             const fs::path &token_dir = {}) {
    Featurized f;
    f.docs.resize(entries.size());
    std::vector<std::size_t> dropped(entries.size()), total(entries.size());
    parallel_for(entries.size(), jobs, [&](std::size_t i) {
        const BehaviorReport report = load_report(*entries[i]);
        dropped[i] = report.dropped_calls;
        total[i] = report.calls.size();
        TokenDocument doc = ngrams(report, order);
        if (!token_dir.empty()) write_file_atomic(token_dir / (doc.sample_id + ".tok"), dump_token_document(doc));
        doc.drop_sequence();
        f.docs[i] = std::move(doc);
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        f.dropped_calls += dropped[i];
        f.total_calls += total[i];
    }
    return f;
}

void make_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error{ErrorCode::IoError, "cannot create " + dir.string()};
}

std::string selection_json(int order, const SelectionParams &params, const SelectionReport &r) {
    ojson rules = ojson::array();
    for (const auto &[rule, removed] : r.rules_applied) rules.push_back(ojson{{"rule", rule}, {"removed", removed}});
    ojson doc{{"order", order},
              {"params",
               {{"min_df", params.min_df}, {"max_df_fraction", params.max_df_fraction}, {"top_k", params.top_k}}},
              {"vocab_before", r.vocab_before},
              {"vocab_after", r.vocab_after},
              {"kept_fraction", r.kept_fraction},
              {"rules_applied", std::move(rules)}};
    return doc.dump(2) + "\n";
}

void print_selection(std::ostream &log, const SelectionReport &r) {
    log << "vocabulary: " << r.vocab_before << " -> " << r.vocab_after << " tokens (kept "
        << format_double(r.kept_fraction) << ")\n";
    for (const auto &[rule, removed] : r.rules_applied) log << "  " << rule << " removed " << removed << "\n";
}

std::string stats_text(const LoadStatistics &stats, std::size_t dropped, std::size_t total) {
    return stats.table() + "calls " + std::to_string(total) + " dropped " + std::to_string(dropped) + "\n";
}

// ---- subcommands -----------------------------------------------------------

void cmd_synth(const RunConfig &c, std::ostream &log) {
    std::vector<FamilyTemplate> families = c.templates.empty() ? builtin_templates() : load_templates(c.templates);
    if (c.noise_rate) {
        for (auto &f : families) f.noise_rate = *c.noise_rate;
    }
    for (const auto &f : families) f.validate();

    make_dir(c.out);
    CorpusPlan plan{c.train_per_class, c.test_per_class, c.seed};
    const auto manifest_path = write_corpus(families, plan, c.out);

    ojson all = ojson::array();
    for (const auto &f : families) all.push_back(ojson::parse(dump_template(f)));
    write_file_atomic(c.out / "templates.json", all.dump(2) + "\n");

    log << manifest_statistics(load_manifest(manifest_path)).table();
    log << "wrote " << manifest_path.string() << "\n";
}

void cmd_featurize(const RunConfig &c, std::ostream &log) {
    const auto manifest = load_manifest(c.manifest);
    const auto entries = pick(manifest, *c.split);
    const auto token_dir = c.out / "tokens";
    make_dir(token_dir);
    const auto f = featurize_entries(entries, *c.order, c.jobs, token_dir);

    std::set<std::string> vocab;
    for (const auto &d : f.docs)
        for (const auto &[t, _] : d.counts) vocab.insert(t);
    std::string text = stats_text(manifest_statistics(manifest), f.dropped_calls, f.total_calls);
    text += "documents " + std::to_string(f.docs.size()) + " order " + std::to_string(*c.order) + " vocabulary " +
            std::to_string(vocab.size()) + "\n";
    write_file_atomic(c.out / "corpus_stats.txt", text);
    log << text;
}

struct Trained {
    Selection selection;
    Model model;
};

Trained train_model(const RunConfig &c, const CorpusManifest &manifest, bool build) {
    const auto entries = manifest.with_split(Split::Train);
    std::set<std::string> labels;
    for (const auto *e : entries)
        if (!e->label.empty()) labels.insert(e->label);
    if (build && labels.size() < 2) {
        throw Error{ErrorCode::InsufficientClasses,
                    "need ≥ 2 classes in the training split, found " + std::to_string(labels.size())};
    }
    if (entries.empty()) throw Error{ErrorCode::EmptyCorpus, "training split is empty"};

    const auto f = featurize_entries(entries, *c.order, c.jobs);
    Trained t;
    t.selection = select_features(f.docs, c.selection);
    if (!build) return t;
    t.model.order = *c.order;
    t.model.selection = c.selection;
    t.model.profile_cap = c.profile_cap;
    t.model.training_samples = f.docs.size();
    t.model.vocab = t.selection.selected;
    t.model.profiles = build_profiles(f.docs, t.selection.selected, c.profile_cap);
    return t;
}

void cmd_select(const RunConfig &c, std::ostream &log) {
    const auto manifest = load_manifest(c.manifest);
    const auto t = train_model(c, manifest, false);
    make_dir(c.out);
    save_vocabulary(t.selection.selected, *c.order, c.selection, c.out / "vocab.txt");
    write_file_atomic(c.out / "selection.json", selection_json(*c.order, c.selection, t.selection.report));
    print_selection(log, t.selection.report);
}

void cmd_train(const RunConfig &c, std::ostream &log) {
    const auto manifest = load_manifest(c.manifest);
    const auto t = train_model(c, manifest, true);
    make_dir(c.out);
    save_model(t.model, c.out / "model.cgm");
    save_vocabulary(t.selection.selected, *c.order, c.selection, c.out / "vocab.txt");
    write_file_atomic(c.out / "selection.json", selection_json(*c.order, c.selection, t.selection.report));

    print_selection(log, t.selection.report);
    log << "class profiles (order " << *c.order << ", cap " << c.profile_cap << "):\n";
    for (const auto &p : t.model.profiles) {
        log << "  " << p.class_name << ": " << p.training_samples << " samples, " << p.tokens.size() << " tokens\n";
    }
    log << "wrote " << (c.out / "model.cgm").string() << "\n";
}

void cmd_classify(const RunConfig &c, const Model &model, std::ostream &log) {
    const auto manifest = load_manifest(c.manifest);
    const auto entries = pick(manifest, *c.split);
    const auto f = featurize_entries(entries, model.order, c.jobs);

    std::vector<ClassificationResult> results(f.docs.size());
    parallel_for(f.docs.size(), c.jobs,
                 [&](std::size_t i) { results[i] = classify(f.docs[i], model.profiles, model.vocab); });

    make_dir(c.out);
    write_file_atomic(c.out / "predictions.csv", predictions_csv(results, model.class_names()));
    log << "classified " << results.size() << " samples -> " << (c.out / "predictions.csv").string() << "\n";
}

void cmd_evaluate(const RunConfig &c, std::ostream &log) {
    const auto results = parse_predictions(read_file(c.predictions));
    const auto manifest = load_manifest(c.manifest);
    std::map<std::string, std::string> truth;
    for (const auto &e : manifest.entries)
        if (!e.label.empty()) truth.emplace(e.sample_id, e.label);

    const auto cm = confusion(results, truth);
    const auto m = metrics(cm);
    make_dir(c.out);
    write_file_atomic(c.out / "metrics.json", metrics_json(cm, m));
    const auto table = metrics_table(cm, m);
    write_file_atomic(c.out / "metrics.txt", table);
    write_file_atomic(c.out / "confusion.csv", confusion_csv(cm));
    log << table;
}

std::string image_params(const RunConfig &c, int order) {
    return "weights=tf order=" + std::to_string(order) + " blur_kernel=" + std::to_string(c.blur.kernel_size) +
           " blur_sigma=" + format_double(c.blur.sigma) + " clahe_tiles=" + std::to_string(c.clahe.tiles_x) + "x" +
           std::to_string(c.clahe.tiles_y) + " clahe_clip=" + format_double(c.clahe.clip_limit);
}

void cmd_export_images(const RunConfig &c, const Model &model, std::ostream &log) {
    if (model.vocab.size() > image_pixels) {
        throw Error{ErrorCode::VocabTooLarge, "model vocabulary has " + std::to_string(model.vocab.size()) +
                                                  " tokens, an image holds " + std::to_string(image_pixels) +
                                                  "; retrain with --top-k " + std::to_string(image_pixels) +
                                                  " or less"};
    }
    const auto manifest = load_manifest(c.manifest);
    const auto entries = pick(manifest, *c.split);
    const std::vector<std::string> vocab_order(model.vocab.begin(), model.vocab.end());
    const std::string vocab_sha = vocab_digest(model.vocab);
    const std::string params = image_params(c, model.order);
    const ImageStage last = *std::max_element(c.stages.begin(), c.stages.end());
    const auto dir = c.out / "images";
    make_dir(dir);

    parallel_for(entries.size(), c.jobs, [&](std::size_t i) {
        const TokenDocument doc = ngrams(load_report(*entries[i]), model.order);
        WeightedVector vec;
        vec.sample_id = doc.sample_id;
        if (!doc.empty()) {
            for (const auto &[t, w] : term_frequency(doc).weights)
                if (model.vocab.contains(t)) vec.weights.emplace(t, w);
        }
        std::array<FeatureImage, 4> chain;
        chain[0] = vector_to_image(vec, vocab_order);
        if (last >= ImageStage::Blurred) chain[1] = gaussian_blur(chain[0], c.blur);
        if (last >= ImageStage::Clahe) chain[2] = clahe(chain[1], c.clahe);
        if (last >= ImageStage::Sobel) chain[3] = sobel(chain[2]);
        for (const auto stage : c.stages) {
            const auto path = dir / (doc.sample_id + "." + std::string{to_string(stage)} + ".png");
            export_png(chain[static_cast<std::size_t>(stage)], path, ImageSidecar{doc.sample_id, vocab_sha, params});
        }
    });
    log << "exported " << entries.size() * c.stages.size() << " images to " << dir.string() << "\n";
}

// ---- echo helpers ----------------------------------------------------------

std::string path_or_empty(const fs::path &p) {
    return p.empty() ? std::string{} : p.string();
}

}  // namespace

std::string_view to_string(SplitFilter s) noexcept {
    switch (s) {
    case SplitFilter::Train: return "train";
    case SplitFilter::Test: return "test";
    case SplitFilter::All: return "all";
    }
    return "all";
}

SplitFilter parse_split_filter(std::string_view name) {
    if (name == "train") return SplitFilter::Train;
    if (name == "test") return SplitFilter::Test;
    if (name == "all") return SplitFilter::All;
    usage("split must be train, test or all (got \"" + std::string{name} + "\")");
}

RunConfig resolve(RunConfig c) {
    if (std::find(subcommands.begin(), subcommands.end(), c.subcommand) == subcommands.end()) {
        usage("unknown subcommand \"" + c.subcommand + "\"");
    }
    if (c.out.empty()) usage("--out must not be empty");
    c.out = absolute_path(c.out);
    c.manifest = absolute_path(c.manifest);
    c.model = absolute_path(c.model);
    c.predictions = absolute_path(c.predictions);
    c.templates = absolute_path(c.templates);

    if (uses(c, {"featurize", "select", "train", "classify", "evaluate", "export-images"}) && c.manifest.empty()) {
        usage(c.subcommand + " needs --manifest");
    }
    if (uses(c, {"classify", "export-images"}) && c.model.empty()) usage(c.subcommand + " needs --model");
    if (uses(c, {"evaluate"}) && c.predictions.empty()) usage("evaluate needs --predictions");

    if (uses(c, {"featurize", "select", "train"}) && !c.order) c.order = 1;
    if (c.order && (*c.order < min_order || *c.order > max_order)) {
        throw Error{ErrorCode::BadOrder, "--order must be 1, 2 or 3"};
    }
    if (!c.split) {
        c.split = uses(c, {"classify"}) ? SplitFilter::Test : SplitFilter::All;
    }
    if (uses(c, {"select", "train"})) c.selection.validate();
    if (c.profile_cap < 1) usage("--profile-cap must be >= 1");
    if (c.subcommand == "synth") {
        if (c.train_per_class + c.test_per_class < 1) usage("synth needs at least one sample per class");
        if (c.noise_rate && !(*c.noise_rate >= 0.0 && *c.noise_rate < 1.0)) usage("--noise-rate must lie in [0, 1)");
    }
    if (c.subcommand == "export-images") {
        if (c.stages.empty()) usage("--stages must name at least one stage");
        std::sort(c.stages.begin(), c.stages.end());
        c.stages.erase(std::unique(c.stages.begin(), c.stages.end()), c.stages.end());
        // surfaces bad blur/CLAHE parameters before any work starts
        FeatureImage probe;
        clahe(gaussian_blur(probe, c.blur), c.clahe);
    }
    return c;
}

fs::path echo_path(const RunConfig &c) {
    return c.out / (c.subcommand + ".config.json");
}

std::string config_echo(const RunConfig &c) {
    ojson j;
    j["format"] = echo_format;
    j["subcommand"] = c.subcommand;
    j["out"] = c.out.string();
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    const auto selection = [&] {
        j["min_df"] = c.selection.min_df;
        j["max_df_fraction"] = c.selection.max_df_fraction;
        j["top_k"] = c.selection.top_k;
    };
    if (c.subcommand == "synth") {
        j["templates"] = path_or_empty(c.templates);
        j["train_per_class"] = c.train_per_class;
        j["test_per_class"] = c.test_per_class;
        j["noise_rate"] = c.noise_rate ? ojson(*c.noise_rate) : ojson(nullptr);
    } else if (c.subcommand == "featurize") {
        j["manifest"] = c.manifest.string();
        j["order"] = *c.order;
        j["split"] = to_string(*c.split);
    } else if (c.subcommand == "select") {
        j["manifest"] = c.manifest.string();
        j["order"] = *c.order;
        selection();
    } else if (c.subcommand == "train") {
        j["manifest"] = c.manifest.string();
        j["order"] = *c.order;
        selection();
        j["profile_cap"] = c.profile_cap;
    } else if (c.subcommand == "classify") {
        j["manifest"] = c.manifest.string();
        j["model"] = c.model.string();
        j["order"] = c.order ? ojson(*c.order) : ojson(nullptr);
        j["split"] = to_string(*c.split);
    } else if (c.subcommand == "evaluate") {
        j["manifest"] = c.manifest.string();
        j["predictions"] = c.predictions.string();
    } else if (c.subcommand == "export-images") {
        j["manifest"] = c.manifest.string();
        j["model"] = c.model.string();
        j["order"] = c.order ? ojson(*c.order) : ojson(nullptr);
        j["split"] = to_string(*c.split);
        ojson stages = ojson::array();
        for (auto s : c.stages) stages.push_back(to_string(s));
        j["stages"] = std::move(stages);
        j["blur_kernel"] = c.blur.kernel_size;
        j["blur_sigma"] = c.blur.sigma;
        j["clahe_tiles_x"] = c.clahe.tiles_x;
        j["clahe_tiles_y"] = c.clahe.tiles_y;
        j["clahe_clip_limit"] = c.clahe.clip_limit;
    }
    return j.dump(2) + "\n";
}

RunConfig parse_config_echo(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception &e) {
        usage(std::string{"config echo is not valid JSON: "} + e.what());
    }
    if (!j.is_object() || j.value("format", std::string{}) != echo_format) usage("not a callgram config echo");

    RunConfig c;
    try {
        c.subcommand = j.at("subcommand").get<std::string>();
        c.out = j.at("out").get<std::string>();
        c.seed = j.value("seed", c.seed);
        c.jobs = j.value("jobs", c.jobs);
        if (j.contains("order") && !j["order"].is_null()) c.order = j["order"].get<int>();
        c.manifest = j.value("manifest", std::string{});
        c.model = j.value("model", std::string{});
        c.predictions = j.value("predictions", std::string{});
        c.templates = j.value("templates", std::string{});
        c.selection.min_df = j.value("min_df", c.selection.min_df);
        c.selection.max_df_fraction = j.value("max_df_fraction", c.selection.max_df_fraction);
        c.selection.top_k = j.value("top_k", c.selection.top_k);
        c.profile_cap = j.value("profile_cap", c.profile_cap);
        c.train_per_class = j.value("train_per_class", c.train_per_class);
        c.test_per_class = j.value("test_per_class", c.test_per_class);
        if (j.contains("noise_rate") && !j["noise_rate"].is_null()) c.noise_rate = j["noise_rate"].get<double>();
        if (j.contains("split")) c.split = parse_split_filter(j["split"].get<std::string>());
        if (j.contains("stages")) {
            c.stages.clear();
            for (const auto &s : j["stages"]) {
                const auto stage = parse_stage(s.get<std::string>());
                if (!stage) usage("unknown image stage " + s.get<std::string>());
                c.stages.push_back(*stage);
            }
        }
        c.blur.kernel_size = j.value("blur_kernel", c.blur.kernel_size);
        c.blur.sigma = j.value("blur_sigma", c.blur.sigma);
        c.clahe.tiles_x = j.value("clahe_tiles_x", c.clahe.tiles_x);
        c.clahe.tiles_y = j.value("clahe_tiles_y", c.clahe.tiles_y);
        c.clahe.clip_limit = j.value("clahe_clip_limit", c.clahe.clip_limit);
    } catch (const nlohmann::json::exception &e) {
        usage(std::string{"bad config echo: "} + e.what());
    }
    return c;
}

void run(const RunConfig &config, std::ostream &log) {
    RunConfig c = resolve(config);

    if (uses(c, {"classify", "export-images"})) {
        const Model model = load_model(c.model);
        if (c.order && *c.order != model.order) {
            throw Error{ErrorCode::OrderMismatch, "--order " + std::to_string(*c.order) +
                                                      " does not match the model's order " +
                                                      std::to_string(model.order)};
        }
        c.order = model.order;
        make_dir(c.out);
        write_file_atomic(echo_path(c), config_echo(c));
        if (c.subcommand == "classify") {
            cmd_classify(c, model, log);
        } else {
            cmd_export_images(c, model, log);
        }
        return;
    }

    make_dir(c.out);
    write_file_atomic(echo_path(c), config_echo(c));
    if (c.subcommand == "synth") cmd_synth(c, log);
    else if (c.subcommand == "featurize") cmd_featurize(c, log);
    else if (c.subcommand == "select") cmd_select(c, log);
    else if (c.subcommand == "train") cmd_train(c, log);
    else if (c.subcommand == "evaluate") cmd_evaluate(c, log);
}

std::string predictions_csv(const std::vector<ClassificationResult> &results,
                            const std::vector<std::string> &classes) {
    std::string out = "sample_id,predicted,margin";
    for (const auto &cls : classes) out += ",score:" + cls;
    out += '\n';
    for (const auto &r : results) {
        out += r.sample_id + "," + r.predicted + "," + format_double(r.margin);
        for (const auto &cls : classes) {
            const auto it = r.scores.find(cls);
            out += "," + format_double(it == r.scores.end() ? 0.0 : it->second);
        }
        out += '\n';
    }
    return out;
}

std::vector<ClassificationResult> parse_predictions(std::string_view csv) {
    auto split_fields = [](std::string_view line) {
        std::vector<std::string> fields;
        std::size_t pos = 0;
        for (;;) {
            const auto comma = line.find(',', pos);
            fields.emplace_back(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        return fields;
    };
    auto bad = [](const std::string &msg) { throw Error{ErrorCode::MalformedReport, "predictions file: " + msg}; };

    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        auto nl = csv.find('\n', pos);
        if (nl == std::string_view::npos) nl = csv.size();
        auto line = csv.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        pos = nl + 1;
    }
    if (lines.empty()) bad("missing header");
    const auto header = split_fields(lines.front());
    if (header.size() < 3 || header[0] != "sample_id" || header[1] != "predicted" || header[2] != "margin") {
        bad("header must start with sample_id,predicted,margin");
    }
    std::vector<std::string> classes;
    for (std::size_t i = 3; i < header.size(); ++i) {
        if (header[i].rfind("score:", 0) != 0) bad("unexpected column " + header[i]);
        classes.push_back(header[i].substr(6));
    }

    std::vector<ClassificationResult> out;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto f = split_fields(lines[l]);
        if (f.size() != header.size()) bad("line " + std::to_string(l + 1) + " has the wrong number of fields");
        ClassificationResult r;
        r.sample_id = f[0];
        r.predicted = f[1];
        try {
            r.margin = std::stod(f[2]);
            for (std::size_t i = 0; i < classes.size(); ++i) r.scores[classes[i]] = std::stod(f[i + 3]);
        } catch (const std::exception &) {
            bad("line " + std::to_string(l + 1) + " has a non-numeric score");
        }
        if (r.sample_id.empty() || r.predicted.empty()) bad("line " + std::to_string(l + 1) + " has empty fields");
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace callgram::app
