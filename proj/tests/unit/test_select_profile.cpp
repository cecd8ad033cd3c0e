#include "support.hpp"

#include "oracles.hpp"

#include "callgram/feature_select.hpp"
#include "callgram/profile.hpp"

#include <random>

using namespace callgram;
using testing::doc;
using testing::error_code_of;

namespace {

std::vector<TokenDocument> docs_of(const std::vector<std::vector<std::string>> &raw,
                                   const std::vector<std::string> &labels = {}) {
    std::vector<TokenDocument> out;
    for (std::size_t i = 0; i < raw.size(); ++i)
        out.push_back(doc("d" + std::to_string(i), labels.empty() ? "" : labels[i], raw[i]));
    return out;
}

oracle::Tokens sorted(const TokenSet &s) {
    return {s.begin(), s.end()};
}

// df engineered per token: a=6 b=5 c=4 d=3 e=2 f=1 g=1, with repeated
// counts so the TF-IDF masses differ
const std::vector<std::vector<std::string>> engineered = {
    {"a", "b", "c", "d", "e", "f"},
    {"a", "b", "c", "d", "e", "e"},
    {"a", "b", "c", "d", "g"},
    {"a", "b", "c", "c", "c"},
    {"a", "b", "b"},
    {"a"},
};

}  // namespace

TEST_SUITE("feature_select") {

TEST_CASE("every token once with min_df 2 is an EmptySelection") {
    const auto docs = docs_of({{"a"}, {"b"}, {"c"}});
    CHECK(error_code_of([&] { select_features(docs, SelectionParams{2, 0.9, 100}); }) == ErrorCode::EmptySelection);
}

TEST_CASE("no-op parameters keep everything") {
    const auto docs = docs_of(engineered);
    const auto s = select_features(docs, SelectionParams{1, 1.0, 1000});
    CHECK(s.selected.size() == 7);
    CHECK(s.report.kept_fraction == 1.0);
    CHECK(s.report.vocab_before == s.report.vocab_after);
}

TEST_CASE("engineered corpus matches the rule-by-rule oracle") {
    const auto docs = docs_of(engineered);
    for (std::size_t min_df : {1u, 2u, 3u}) {
        for (double max_frac : {1.0, 0.9, 0.7, 0.5}) {
            for (std::size_t top_k : {1u, 2u, 3u, 100u}) {
                const auto o = oracle::select(engineered, min_df, max_frac, top_k);
                if (o.selected.empty()) {
                    CHECK(error_code_of([&] { select_features(docs, SelectionParams{min_df, max_frac, top_k}); }) ==
                          ErrorCode::EmptySelection);
                    continue;
                }
                const auto s = select_features(docs, SelectionParams{min_df, max_frac, top_k});
                CHECK(sorted(s.selected) == o.selected);
                CHECK(s.report.vocab_before == o.before);
                REQUIRE(s.report.rules_applied.size() == 3);
                CHECK(s.report.rules_applied[0] == std::pair<std::string, std::size_t>{"min_df", o.removed_min_df});
                CHECK(s.report.rules_applied[1] ==
                      std::pair<std::string, std::size_t>{"max_df_fraction", o.removed_max_df});
                CHECK(s.report.rules_applied[2] == std::pair<std::string, std::size_t>{"top_k", o.removed_top_k});
                CHECK(s.report.kept_fraction ==
                      static_cast<double>(s.report.vocab_after) / static_cast<double>(s.report.vocab_before));
            }
        }
    }
}

TEST_CASE("engineered corpus, frozen outcomes") {
    const auto docs = docs_of(engineered);
    // min_df 2 drops f,g; df/N > 0.7 drops a (6/6) and b (5/6)
    const auto s = select_features(docs, SelectionParams{2, 0.7, 100});
    CHECK(sorted(s.selected) == oracle::Tokens{"c", "d", "e"});
    CHECK(s.report.kept_fraction == 3.0 / 7.0);
    // top 1 by mass among c,d,e: c carries the most weight
    CHECK(sorted(select_features(docs, SelectionParams{2, 0.7, 1}).selected) == oracle::Tokens{"c"});
}

TEST_CASE("raising min_df never grows the selection") {
    const auto docs = docs_of(engineered);
    std::size_t previous = SIZE_MAX;
    for (std::size_t min_df = 1; min_df <= 6; ++min_df) {
        const auto s = select_features(docs, SelectionParams{min_df, 1.0, 100});
        CHECK(s.selected.size() <= previous);
        previous = s.selected.size();
    }
}

TEST_CASE("parameter validation") {
    const auto docs = docs_of(engineered);
    CHECK(error_code_of([&] { select_features(docs, SelectionParams{0, 0.9, 10}); }) == ErrorCode::UsageError);
    CHECK(error_code_of([&] { select_features(docs, SelectionParams{1, 0.0, 10}); }) == ErrorCode::UsageError);
    CHECK(error_code_of([&] { select_features(docs, SelectionParams{1, 1.5, 10}); }) == ErrorCode::UsageError);
    CHECK(error_code_of([&] { select_features(docs, SelectionParams{1, 0.9, 0}); }) == ErrorCode::UsageError);
    CHECK(error_code_of([] { select_features(std::vector<TokenDocument>{}, SelectionParams{}); }) ==
          ErrorCode::EmptyCorpus);
}

TEST_CASE("defaults") {
    SelectionParams p;
    CHECK(p.min_df == 2);
    CHECK(p.max_df_fraction == 0.9);
    CHECK(p.top_k == 100000);
}

}

TEST_SUITE("profile_classify") {

TEST_CASE("jaccard examples") {
    CHECK(jaccard({"p", "q"}, {"p", "q"}) == 1.0);
    CHECK(jaccard({"p", "q"}, {"q", "r"}) == 1.0 / 3.0);
    CHECK(jaccard({}, {"p"}) == 0.0);
    CHECK(jaccard({}, {}) == 0.0);
}

TEST_CASE("jaccard agrees with set enumeration") {
    std::mt19937_64 rng{11};
    for (int i = 0; i < 300; ++i) {
        TokenSet a, b;
        const auto na = rng() % 8, nb = rng() % 8;
        for (std::uint64_t k = 0; k < na; ++k) a.insert("t" + std::to_string(rng() % 10));
        for (std::uint64_t k = 0; k < nb; ++k) b.insert("t" + std::to_string(rng() % 10));
        CHECK(jaccard(a, b) == oracle::jaccard(sorted(a), sorted(b)));
        CHECK(jaccard(a, b) == jaccard(b, a));
    }
}

TEST_CASE("single document profile and two-document union") {
    const TokenSet selected = {"t1", "t2", "t3"};
    const std::vector<TokenDocument> one = {doc("a", "A", {"t1", "t2"}), doc("z", "Z", {"t3"})};
    const auto p1 = build_profiles(one, selected, 10);
    REQUIRE(p1.size() == 2);
    CHECK(p1[0].class_name == "A");
    CHECK(p1[0].tokens == TokenSet{"t1", "t2"});
    CHECK(p1[0].training_samples == 1);

    const std::vector<TokenDocument> two = {doc("a", "A", {"t1", "t2"}), doc("b", "A", {"t2", "t3"})};
    const auto p2 = build_profiles(two, selected, 10);
    REQUIRE(p2.size() == 1);
    CHECK(p2[0].tokens == TokenSet{"t1", "t2", "t3"});
    CHECK(p2[0].training_samples == 2);
}

TEST_CASE("profiles only keep selected tokens") {
    const std::vector<TokenDocument> d = {doc("a", "A", {"keep", "drop"})};
    CHECK(build_profiles(d, TokenSet{"keep"}, 10)[0].tokens == TokenSet{"keep"});
}

TEST_CASE("cap keeps the top class-summed TF-IDF tokens") {
    const std::vector<std::vector<std::string>> raw = {
        {"t1", "t1", "t1", "t2", "t3", "t4"}, {"t1", "t2", "t2", "t5", "t6"}, {"t7", "t8", "t8", "t3"},
        {"o1", "o2", "t1"}, {"o1", "o3"}};
    const std::vector<std::string> labels = {"Eng", "Eng", "Eng", "Other", "Other"};
    const auto docs = docs_of(raw, labels);
    TokenSet selected;
    for (const auto &r : raw) selected.insert(r.begin(), r.end());

    const auto profiles = build_profiles(docs, selected, 5);
    const auto expected = oracle::profiles(raw, labels, sorted(selected), 5);
    REQUIRE(profiles.size() == 2);
    CHECK(sorted(profiles[0].tokens) == expected.at("Eng"));
    CHECK(sorted(profiles[1].tokens) == expected.at("Other"));
    CHECK(profiles[0].tokens.size() == 5);
    // frozen: t1 and t8 lead, then t2; the last two go to t3 and t7
    CHECK(profiles[0].tokens == TokenSet{"t1", "t2", "t3", "t7", "t8"});
}

TEST_CASE("scaling the weights changes no membership") {
    const std::vector<std::vector<std::string>> raw = {{"a", "b", "b", "c"}, {"c", "d", "e"}, {"x", "y"}};
    const auto docs = docs_of(raw, {"P", "P", "Q"});
    const TokenSet selected = {"a", "b", "c", "d", "e", "x", "y"};
    auto weights = tfidf(docs);
    const auto base = build_profiles(docs, weights, selected, 3);
    for (auto &w : weights)
        for (auto &[_, v] : w.weights) v *= 7.25;
    CHECK(build_profiles(docs, weights, selected, 3) == base);
}

TEST_CASE("profile errors") {
    CHECK(error_code_of([] {
              build_profiles(std::vector<TokenDocument>{doc("a", "", {"x"})}, TokenSet{"x"}, 5);
          }) == ErrorCode::UnlabeledSample);
    CHECK(error_code_of([] {
              build_profiles(std::vector<TokenDocument>{doc("a", "A", {"x"}), doc("b", "B", {"y"})}, TokenSet{"x"}, 5);
          }) == ErrorCode::EmptyClass);
    CHECK(error_code_of([] {
              build_profiles(std::vector<TokenDocument>{doc("a", "A", {"x"})}, TokenSet{"x"}, 0);
          }) == ErrorCode::UsageError);
}

TEST_CASE("classification examples") {
    ClassProfile a{"A", 1, {"p", "q"}, 10, 1};
    ClassProfile b{"B", 1, {"r", "s"}, 10, 1};
    const std::vector<ClassProfile> profiles = {a, b};
    const TokenSet selected = {"p", "q", "r", "s"};

    const auto hit = classify(doc("x", "", {"p", "q"}), profiles, selected);
    CHECK(hit.predicted == "A");
    CHECK(hit.scores.at("A") == 1.0);
    CHECK(hit.margin == 1.0);

    const auto miss = classify(doc("y", "", {"zz"}), profiles, selected);
    CHECK(miss.predicted == "A");
    CHECK(miss.scores.at("A") == 0.0);
    CHECK(miss.scores.at("B") == 0.0);
    CHECK(miss.margin == 0.0);

    const auto tie = classify(doc("t", "", {"q", "r"}), std::vector<ClassProfile>{b, a}, selected);
    CHECK(tie.predicted == "A");
    CHECK(tie.margin == 0.0);
}

TEST_CASE("classification errors") {
    const std::vector<ClassProfile> one = {ClassProfile{"A", 1, {"p"}, 1, 1}};
    CHECK(error_code_of([&] { classify(doc("x", "", {"p"}), one, TokenSet{"p"}); }) ==
          ErrorCode::InsufficientClasses);
    const std::vector<ClassProfile> two = {ClassProfile{"A", 2, {"p"}, 1, 1}, ClassProfile{"B", 2, {"q"}, 1, 1}};
    CHECK(error_code_of([&] { classify(doc("x", "", {"p"}, 1), two, TokenSet{"p"}); }) == ErrorCode::OrderMismatch);
}

TEST_CASE("three-class corpus with engineered overlaps against the brute-force classifier") {
    const std::vector<std::vector<std::string>> train = {
        {"a1", "a2", "a3", "s1"}, {"a1", "a4", "s1", "s2"}, {"b1", "b2", "s1"},
        {"b1", "b3", "s2", "a1"}, {"c1", "c2", "c3"},        {"c1", "s2", "b2"}};
    const std::vector<std::string> labels = {"Alpha", "Alpha", "Beta", "Beta", "Gamma", "Gamma"};
    const std::vector<std::vector<std::string>> test = {
        {"a1", "s1"}, {"b1", "s2"}, {"c1", "b2"}, {"s1", "s2"}, {"a2", "b3", "c3"}, {"zz"}, {"c2", "a4", "b1"}};
    const auto docs = docs_of(train, labels);
    TokenSet selected;
    for (const auto &r : train) selected.insert(r.begin(), r.end());
    selected.erase("c3");
    const auto profiles = build_profiles(docs, selected, 4);
    const auto oracle_profiles = oracle::profiles(train, labels, sorted(selected), 4);
    for (const auto &p : profiles) CHECK(sorted(p.tokens) == oracle_profiles.at(p.class_name));

    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto r = classify(doc("q" + std::to_string(i), "", test[i]), profiles, selected);
        const auto [best, scores] = oracle::classify(test[i], oracle_profiles, sorted(selected));
        CHECK(r.predicted == best);
        for (const auto &[cls, s] : scores) CHECK(r.scores.at(cls) == s);
        CHECK(r.margin >= 0.0);
    }
}

TEST_CASE("similarity matrix") {
    const std::vector<TokenDocument> one = {doc("a", "", {"x", "y"})};
    const auto m1 = similarity_matrix(one, one, TokenSet{"x", "y"});
    CHECK(m1.entries == std::vector<double>{1.0});

    const std::vector<TokenDocument> disjoint = {doc("a", "", {"x"}), doc("b", "", {"y"})};
    const auto m2 = similarity_matrix(disjoint, disjoint, TokenSet{"x", "y"});
    CHECK(m2.at(0, 1) == 0.0);
    CHECK(m2.at(1, 0) == 0.0);

    const std::vector<std::vector<std::string>> raw = {{"a", "b", "c"}, {"b", "c", "d"}, {"a", "e"}, {"c", "d", "e", "f"}};
    const auto docs = docs_of(raw);
    const TokenSet selected = {"a", "b", "c", "d", "e"};
    const auto m = similarity_matrix(docs, docs, selected);
    REQUIRE(m.row_ids.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(m.at(i, i) == 1.0);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(m.at(i, j) == m.at(j, i));
            oracle::Tokens fi, fj;
            for (const auto &t : raw[i])
                if (selected.contains(t)) fi.push_back(t);
            for (const auto &t : raw[j])
                if (selected.contains(t)) fj.push_back(t);
            CHECK(m.at(i, j) == oracle::jaccard(fi, fj));
        }
    }
    CHECK(m.at(0, 1) == 0.5);  // {a,b,c} vs {b,c,d}

    const std::vector<TokenDocument> mixed = {doc("a", "", {"x"}, 1), doc("b", "", {"x"}, 2)};
    CHECK(error_code_of([&] { similarity_matrix(mixed, mixed, TokenSet{"x"}); }) == ErrorCode::OrderMismatch);
}

TEST_CASE("classifier determinism") {
    const auto docs = docs_of({{"a", "b"}, {"c", "d"}, {"a", "d"}}, {"X", "Y", "Y"});
    const TokenSet sel = {"a", "b", "c", "d"};
    const auto p = build_profiles(docs, sel, 10);
    const auto d = doc("q", "", {"a", "c"});
    CHECK(classify(d, p, sel) == classify(d, p, sel));
}

}
