#include "support.hpp"

#include "oracles.hpp"

#include "callgram/evaluate.hpp"

#include <cmath>
#include <random>

using namespace callgram;
using testing::error_code_of;

namespace {

ConfusionMatrix matrix(std::vector<std::string> classes, std::vector<std::vector<std::int64_t>> counts) {
    return ConfusionMatrix{std::move(classes), std::move(counts)};
}

ClassificationResult result(std::string id, std::string predicted) {
    ClassificationResult r;
    r.sample_id = std::move(id);
    r.predicted = std::move(predicted);
    return r;
}

void check_against_oracle(const ConfusionMatrix &cm) {
    const auto m = metrics(cm);
    const auto samples = oracle::expand(cm.counts);
    const int k = static_cast<int>(cm.classes.size());
    double correct = 0, f1_sum = 0;
    for (const auto &[t, p] : samples) correct += (t == p) ? 1 : 0;
    CHECK(std::abs(m.accuracy - correct / static_cast<double>(samples.size())) <= 1e-12);
    for (int c = 0; c < k; ++c) {
        const auto b = oracle::one_vs_rest(samples, c);
        const auto &got = m.per_class[static_cast<std::size_t>(c)];
        const double precision = (b.tp + b.fp) > 0 ? b.tp / (b.tp + b.fp) : 0.0;
        const double recall = (b.tp + b.fn) > 0 ? b.tp / (b.tp + b.fn) : 0.0;
        const double f1 = (precision + recall) > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        f1_sum += f1;
        CHECK(std::abs(got.precision - precision) <= 1e-12);
        CHECK(std::abs(got.recall - recall) <= 1e-12);
        CHECK(std::abs(got.f1 - f1) <= 1e-12);
        CHECK(std::abs(got.accuracy - (b.tp + b.tn) / static_cast<double>(samples.size())) <= 1e-12);
    }
    CHECK(std::abs(m.macro_f1 - f1_sum / k) <= 1e-12);
    CHECK(std::abs(m.mcc - oracle::mcc(samples, k)) <= 1e-12);
}

}  // namespace

TEST_SUITE("evaluate") {

TEST_CASE("confusion from results") {
    const std::map<std::string, std::string> truth = {{"s1", "A"}, {"s2", "A"}, {"s3", "A"}, {"s4", "A"}};
    const std::vector<ClassificationResult> ok = {result("s1", "A"), result("s2", "A"), result("s3", "A")};
    const auto cm = confusion(ok, truth);
    CHECK(cm.classes == std::vector<std::string>{"A"});
    CHECK(cm.counts == std::vector<std::vector<std::int64_t>>{{3}});

    const std::vector<ClassificationResult> wrong = {result("s4", "B")};
    const auto cm2 = confusion(wrong, truth);
    CHECK(cm2.counts[cm2.index_of("A")][cm2.index_of("B")] == 1);

    const std::vector<ClassificationResult> unknown = {result("nope", "A")};
    CHECK(error_code_of([&] { confusion(unknown, truth); }) == ErrorCode::MissingTruth);
}

TEST_CASE("twenty-sample tally") {
    // truth pattern and predictions written out one by one
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"A", "A"}, {"A", "A"}, {"A", "B"}, {"A", "A"}, {"A", "C"}, {"A", "A"}, {"A", "A"},
        {"B", "B"}, {"B", "B"}, {"B", "A"}, {"B", "B"}, {"B", "B"}, {"B", "C"}, {"C", "C"},
        {"C", "C"}, {"C", "C"}, {"C", "B"}, {"C", "C"}, {"C", "A"}, {"C", "C"}};
    std::map<std::string, std::string> truth;
    std::vector<ClassificationResult> results;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto id = "s" + std::to_string(i);
        truth[id] = pairs[i].first;
        results.push_back(result(id, pairs[i].second));
    }
    const auto cm = confusion(results, truth);
    CHECK(cm.classes == std::vector<std::string>{"A", "B", "C"});
    CHECK(cm.counts == std::vector<std::vector<std::int64_t>>{{5, 1, 1}, {1, 4, 1}, {1, 1, 5}});
    CHECK(cm.total() == 20);
    check_against_oracle(cm);
}

TEST_CASE("perfect two-class matrix") {
    const auto m = metrics(matrix({"A", "B"}, {{4, 0}, {0, 6}}));
    CHECK(m.accuracy == 1.0);
    CHECK(m.macro_f1 == 1.0);
    CHECK(m.mcc == 1.0);
    for (const auto &c : m.per_class) CHECK(c.f1 == 1.0);
}

TEST_CASE("no-information matrix") {
    const auto m = metrics(matrix({"A", "B"}, {{5, 5}, {5, 5}}));
    CHECK(m.accuracy == 0.5);
    CHECK(m.mcc == 0.0);
    CHECK_FALSE(m.mcc_undefined);
}

TEST_CASE("fixed matrix [[8,2],[1,9]]") {
    const auto cm = matrix({"A", "B"}, {{8, 2}, {1, 9}});
    const auto m = metrics(cm);
    check_against_oracle(cm);
    // frozen values worked out by hand
    CHECK(std::abs(m.accuracy - 0.85) <= 1e-12);
    CHECK(std::abs(m.per_class[0].precision - 8.0 / 9.0) <= 1e-12);
    CHECK(std::abs(m.per_class[0].recall - 0.8) <= 1e-12);
    CHECK(std::abs(m.per_class[0].f1 - 16.0 / 19.0) <= 1e-12);
    CHECK(std::abs(m.per_class[1].precision - 9.0 / 11.0) <= 1e-12);
    CHECK(std::abs(m.per_class[1].recall - 0.9) <= 1e-12);
    CHECK(std::abs(m.per_class[1].f1 - 6.0 / 7.0) <= 1e-12);
    CHECK(std::abs(m.mcc - 70.0 / std::sqrt(9900.0)) <= 1e-12);
    CHECK(std::abs(m.macro_f1 - (16.0 / 19.0 + 6.0 / 7.0) / 2.0) <= 1e-12);
}

TEST_CASE("random matrices against the oracle") {
    std::mt19937_64 rng{5};
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t k = 2 + rng() % 4;
        std::vector<std::string> classes;
        for (std::size_t i = 0; i < k; ++i) classes.push_back(std::string(1, static_cast<char>('A' + i)));
        std::vector<std::vector<std::int64_t>> counts(k, std::vector<std::int64_t>(k));
        for (auto &row : counts)
            for (auto &c : row) c = static_cast<std::int64_t>(rng() % 7);
        counts[0][0] += 1;
        check_against_oracle(matrix(classes, counts));
    }
}

TEST_CASE("zero denominators give 0 with a flag") {
    // class C never appears and is never predicted
    const auto m = metrics(matrix({"A", "B", "C"}, {{3, 1, 0}, {0, 2, 0}, {0, 0, 0}}));
    const auto &c = m.per_class[2];
    CHECK(c.precision == 0.0);
    CHECK(c.precision_undefined);
    CHECK(c.recall_undefined);
    CHECK(c.f1_undefined);
    CHECK_FALSE(m.per_class[0].f1_undefined);
    CHECK(std::isfinite(m.mcc));

    // only one class present: MCC denominator vanishes
    const auto single = metrics(matrix({"A"}, {{5}}));
    CHECK(single.mcc == 0.0);
    CHECK(single.mcc_undefined);
}

TEST_CASE("empty matrix") {
    CHECK(error_code_of([] { metrics(matrix({"A", "B"}, {{0, 0}, {0, 0}})); }) == ErrorCode::EmptyMatrix);
}

TEST_CASE("permutation invariance") {
    const auto cm = matrix({"A", "B", "C"}, {{5, 1, 2}, {0, 7, 1}, {3, 0, 4}});
    const auto m = metrics(cm);
    const auto p = cm.permuted({"C", "A", "B"});
    CHECK(p.counts[0][0] == 4);
    CHECK(p.counts[1][0] == 2);
    const auto mp = metrics(p);
    CHECK(mp.accuracy == m.accuracy);
    CHECK(std::abs(mp.macro_f1 - m.macro_f1) <= 1e-15);
    CHECK(std::abs(mp.mcc - m.mcc) <= 1e-15);
}

TEST_CASE("MCC is 1 exactly for diagonal matrices and 0 for rank one") {
    CHECK(metrics(matrix({"A", "B", "C"}, {{2, 0, 0}, {0, 9, 0}, {0, 0, 1}})).mcc == 1.0);
    CHECK(metrics(matrix({"A", "B", "C"}, {{2, 0, 0}, {0, 9, 1}, {0, 0, 1}})).mcc < 1.0);
    // rows proportional to (1, 2, 3): prediction independent of truth
    const auto rank1 = metrics(matrix({"A", "B", "C"}, {{1, 2, 3}, {2, 4, 6}, {3, 6, 9}}));
    CHECK(std::abs(rank1.mcc) <= 1e-12);
}

TEST_CASE("report rendering") {
    const auto cm = matrix({"Worm", "Virus"}, {{8, 2}, {1, 9}});
    const auto m = metrics(cm);
    const auto csv = confusion_csv(cm);
    CHECK(csv == "true\\predicted,Worm,Virus\nWorm,8,2\nVirus,1,9\n");
    const auto table = metrics_table(cm, m);
    CHECK(table.find("one-vs-rest") != std::string::npos);
    CHECK(table.find("accuracy  0.8500") != std::string::npos);
    const auto json = metrics_json(cm, m);
    CHECK(json.find("\"macro_f1\"") != std::string::npos);
    CHECK(json.find("one-vs-rest") != std::string::npos);
}

}
