#include "callgram/feature_select.hpp"
#include "callgram/featurize.hpp"
#include "callgram/image.hpp"
#include "callgram/persistence.hpp"
#include "callgram/profile.hpp"
#include "callgram/synth.hpp"

#include <benchmark/benchmark.h>

using namespace callgram;

namespace {

struct Corpus {
    std::vector<BehaviorReport> train, test;
};

const Corpus &corpus() {
    static const Corpus c = [] {
        Corpus out;
        for (const auto &f : builtin_templates()) {
            const auto gen = generate(f, 70, family_seed(1, f.class_name));
            for (std::size_t i = 0; i < gen.size(); ++i) {
                auto r = parse_report(gen[i].json, gen[i].sample_id);
                r.label = gen[i].label;
                (i < 50 ? out.train : out.test).push_back(std::move(r));
            }
        }
        return out;
    }();
    return c;
}

std::vector<TokenDocument> docs_of(const std::vector<BehaviorReport> &reports, int order) {
    std::vector<TokenDocument> docs;
    for (const auto &r : reports) docs.push_back(ngrams(r, order));
    return docs;
}

void BM_ParseReport(benchmark::State &state) {
    const auto json = generate(builtin_templates()[0], 1, 3)[0].json;
    for (auto _ : state) benchmark::DoNotOptimize(parse_report(json, "s"));
}
BENCHMARK(BM_ParseReport);

void BM_Ngrams(benchmark::State &state) {
    const int order = static_cast<int>(state.range(0));
    const auto &reports = corpus().train;  // built outside the timed loop
    for (auto _ : state) benchmark::DoNotOptimize(docs_of(reports, order));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus().train.size()));
}
BENCHMARK(BM_Ngrams)->Arg(1)->Arg(2)->Arg(3);

void BM_SelectAndProfile(benchmark::State &state) {
    const auto docs = docs_of(corpus().train, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const auto sel = select_features(docs, {});
        benchmark::DoNotOptimize(build_profiles(docs, sel.selected, 20000));
    }
}
BENCHMARK(BM_SelectAndProfile)->Arg(1)->Arg(3);

void BM_Classify(benchmark::State &state) {
    const int order = static_cast<int>(state.range(0));
    const auto train = docs_of(corpus().train, order);
    const auto test = docs_of(corpus().test, order);
    const auto sel = select_features(train, {});
    const auto profiles = build_profiles(train, sel.selected, 20000);
    for (auto _ : state) {
        for (const auto &d : test) benchmark::DoNotOptimize(classify(d, profiles, sel.selected));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(test.size()));
}
BENCHMARK(BM_Classify)->Arg(1)->Arg(3);

void BM_ModelRoundTrip(benchmark::State &state) {
    const auto train = docs_of(corpus().train, 2);
    Model m;
    m.order = 2;
    m.profile_cap = 20000;
    m.vocab = select_features(train, {}).selected;
    m.profiles = build_profiles(train, m.vocab, m.profile_cap);
    for (auto _ : state) benchmark::DoNotOptimize(parse_model(serialize_model(m)));
}
BENCHMARK(BM_ModelRoundTrip);

void BM_ImagePipeline(benchmark::State &state) {
    const auto train = docs_of(corpus().train, 1);
    const auto vocab = select_features(train, {}).selected;
    const std::vector<std::string> order(vocab.begin(), vocab.end());
    const auto raw = vector_to_image(term_frequency(train.front()), order);
    for (auto _ : state) benchmark::DoNotOptimize(encode_png(run_pipeline(raw, ImageStage::Sobel)));
}
BENCHMARK(BM_ImagePipeline);

}  // namespace
BENCHMARK_MAIN();
