// callgram: command-line front end.

#include "app/app.hpp"

#include "callgram/error.hpp"
#include "callgram/io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using callgram::app::RunConfig;

void add_common(CLI::App *sub, RunConfig &c, int &order) {
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sub->add_option("--order", order, "n-gram order")->check(CLI::IsMember({1, 2, 3}));
    sub->add_option("--jobs", c.jobs, "worker threads, 0 = all cores")->capture_default_str();
}

void add_selection(CLI::App *sub, RunConfig &c) {
    sub->add_option("--min-df", c.selection.min_df, "drop tokens seen in fewer documents")->capture_default_str();
    sub->add_option("--max-df-fraction", c.selection.max_df_fraction, "drop tokens in a larger share of documents")
        ->capture_default_str();
    sub->add_option("--top-k", c.selection.top_k, "keep at most this many tokens")->capture_default_str();
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"callgram: n-gram API-call profiles for behavioral malware classification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string{"callgram 1.0.0"});

    RunConfig c;
    int order = 0;
    std::string split;
    std::string stages;
    double noise_rate = -1.0;
    std::filesystem::path rerun_config;
    std::filesystem::path rerun_out;

    auto *synth = app.add_subcommand("synth", "generate a synthetic labeled corpus and manifest");
    add_common(synth, c, order);
    synth->add_option("--templates", c.templates, "template JSON (object or array); built-in families if omitted")
        ->check(CLI::ExistingFile);
    synth->add_option("--train-per-class", c.train_per_class)->capture_default_str();
    synth->add_option("--test-per-class", c.test_per_class)->capture_default_str();
    synth->add_option("--noise-rate", noise_rate, "override every template's noise_rate")->check(CLI::Range(0.0, 1.0));

    auto *featurize = app.add_subcommand("featurize", "write per-sample n-gram token documents");
    add_common(featurize, c, order);
    featurize->add_option("--manifest", c.manifest)->required();
    featurize->add_option("--split", split, "train, test or all (default all)");

    auto *select = app.add_subcommand("select", "select the vocabulary on the training split");
    add_common(select, c, order);
    select->add_option("--manifest", c.manifest)->required();
    add_selection(select, c);

    auto *train = app.add_subcommand("train", "build class profiles and save a model");
    add_common(train, c, order);
    train->add_option("--manifest", c.manifest)->required();
    add_selection(train, c);
    train->add_option("--profile-cap", c.profile_cap, "max tokens per class profile")->capture_default_str();

    auto *classify = app.add_subcommand("classify", "classify samples against a saved model");
    add_common(classify, c, order);
    classify->add_option("--manifest", c.manifest)->required();
    classify->add_option("--model", c.model)->required();
    classify->add_option("--split", split, "train, test or all (default test)");

    auto *evaluate = app.add_subcommand("evaluate", "score predictions against manifest labels");
    add_common(evaluate, c, order);
    evaluate->add_option("--manifest", c.manifest)->required();
    evaluate->add_option("--predictions", c.predictions)->required();

    auto *images = app.add_subcommand("export-images", "render feature vectors as grayscale PNGs");
    add_common(images, c, order);
    images->add_option("--manifest", c.manifest)->required();
    images->add_option("--model", c.model)->required();
    images->add_option("--split", split, "train, test or all (default all)");
    images->add_option("--stages", stages, "comma list of raw,blurred,clahe,sobel (default all four)");
    images->add_option("--blur-kernel", c.blur.kernel_size)->capture_default_str();
    images->add_option("--blur-sigma", c.blur.sigma)->capture_default_str();
    images->add_option("--clahe-tiles-x", c.clahe.tiles_x)->capture_default_str();
    images->add_option("--clahe-tiles-y", c.clahe.tiles_y)->capture_default_str();
    images->add_option("--clahe-clip", c.clahe.clip_limit)->capture_default_str();

    auto *rerun = app.add_subcommand("rerun", "repeat a run from its <subcommand>.config.json echo");
    rerun->add_option("config", rerun_config)->required()->check(CLI::ExistingFile);
    rerun->add_option("--out", rerun_out, "write outputs here instead of the recorded directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(callgram::ErrorFamily::Usage);
    }

    try {
        if (rerun->parsed()) {
            c = callgram::app::parse_config_echo(callgram::read_file(rerun_config));
            if (!rerun_out.empty()) c.out = rerun_out;
        } else {
            c.subcommand = app.get_subcommands().front()->get_name();
            if (order != 0) c.order = order;
            if (noise_rate >= 0.0) c.noise_rate = noise_rate;
            if (!split.empty()) c.split = callgram::app::parse_split_filter(split);
            if (!stages.empty()) {
                c.stages.clear();
                std::size_t pos = 0;
                for (;;) {
                    const auto comma = stages.find(',', pos);
                    const auto name = stages.substr(pos, comma == std::string::npos ? comma : comma - pos);
                    const auto stage = callgram::parse_stage(name);
                    if (!stage) throw callgram::Error{callgram::ErrorCode::UsageError, "unknown stage \"" + name + "\""};
                    c.stages.push_back(*stage);
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
            }
        }
        callgram::app::run(c, std::cout);
    } catch (const callgram::Error &e) {
        std::cerr << "callgram: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception &e) {
        std::cerr << "callgram: " << e.what() << "\n";
        return static_cast<int>(callgram::ErrorFamily::Io);
    }
    return 0;
}
