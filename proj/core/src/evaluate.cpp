#include "callgram/evaluate.hpp"

#include "callgram/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace callgram {

std::int64_t ConfusionMatrix::total() const noexcept {
    std::int64_t n = 0;
    for (const auto &row : counts)
        for (auto c : row) n += c;
    return n;
}

std::int64_t ConfusionMatrix::trace() const noexcept {
    std::int64_t n = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
    return n;
}

std::size_t ConfusionMatrix::index_of(const std::string &name) const {
    auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) {
        throw std::out_of_range{"class not in confusion matrix: " + name};
    }
    return static_cast<std::size_t>(it - classes.begin());
}

ConfusionMatrix ConfusionMatrix::permuted(const std::vector<std::string> &order) const {
    if (order.size() != classes.size()) {
        throw std::invalid_argument{"permutation size mismatch"};
    }
    std::vector<std::size_t> src;
    for (const auto &name : order) src.push_back(index_of(name));
    ConfusionMatrix out;
    out.classes = order;
    out.counts.assign(order.size(), std::vector<std::int64_t>(order.size(), 0));
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = 0; j < order.size(); ++j) out.counts[i][j] = counts[src[i]][src[j]];
    return out;
}

ConfusionMatrix confusion(std::span<const ClassificationResult> results,
                          const std::map<std::string, std::string> &truth) {
    return confusion(results, truth, {});
}

ConfusionMatrix confusion(std::span<const ClassificationResult> results,
                          const std::map<std::string, std::string> &truth,
                          std::vector<std::string> class_order) {
    std::set<std::string> seen{class_order.begin(), class_order.end()};
    std::set<std::string> extra;
    for (const auto &r : results) {
        auto it = truth.find(r.sample_id);
        if (it == truth.end()) {
            throw Error{ErrorCode::MissingTruth, "no ground truth for sample " + r.sample_id};
        }
        for (const auto *label : {&it->second, &r.predicted}) {
            if (!seen.contains(*label)) extra.insert(*label);
        }
    }
    class_order.insert(class_order.end(), extra.begin(), extra.end());

    ConfusionMatrix cm;
    cm.classes = std::move(class_order);
    cm.counts.assign(cm.classes.size(), std::vector<std::int64_t>(cm.classes.size(), 0));
    for (const auto &r : results) {
        const auto t = cm.index_of(truth.at(r.sample_id));
        const auto p = cm.index_of(r.predicted);
        ++cm.counts[t][p];
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix &cm) {
    const std::int64_t total = cm.total();
    if (total <= 0) {
        throw Error{ErrorCode::EmptyMatrix, "confusion matrix has no samples"};
    }
    const std::size_t k = cm.classes.size();
    std::vector<std::int64_t> row_sum(k, 0), col_sum(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            row_sum[i] += cm.counts[i][j];
            col_sum[j] += cm.counts[i][j];
        }
    }

    MetricsReport m;
    m.total = total;
    const auto s = static_cast<double>(total);
    double f1_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        ClassMetrics c;
        c.name = cm.classes[i];
        c.support = row_sum[i];
        const std::int64_t tp = cm.counts[i][i];
        const std::int64_t fp = col_sum[i] - tp;
        const std::int64_t fn = row_sum[i] - tp;
        const std::int64_t tn = total - tp - fp - fn;
        c.accuracy = static_cast<double>(tp + tn) / s;
        if (tp + fp > 0) {
            c.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        } else {
            c.precision_undefined = true;
        }
        if (tp + fn > 0) {
            c.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        } else {
            c.recall_undefined = true;
        }
        // 2TP / (2TP + FP + FN), equal to the harmonic mean when defined
        if (2 * tp + fp + fn > 0) {
            c.f1 = static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
        } else {
            c.f1_undefined = true;
        }
        f1_sum += c.f1;
        m.per_class.push_back(std::move(c));
    }
    m.accuracy = static_cast<double>(cm.trace()) / s;
    m.macro_f1 = k == 0 ? 0.0 : f1_sum / static_cast<double>(k);

    double cov_pt = 0.0, sum_p2 = 0.0, sum_t2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const auto p = static_cast<double>(col_sum[i]);
        const auto t = static_cast<double>(row_sum[i]);
        cov_pt += p * t;
        sum_p2 += p * p;
        sum_t2 += t * t;
    }
    const double numerator = static_cast<double>(cm.trace()) * s - cov_pt;
    const double denominator = std::sqrt((s * s - sum_p2) * (s * s - sum_t2));
    if (denominator > 0.0) {
        m.mcc = std::clamp(numerator / denominator, -1.0, 1.0);
    } else {
        m.mcc_undefined = true;
    }
    return m;
}

std::string metrics_json(const ConfusionMatrix &cm, const MetricsReport &m) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["note"] = "per-class accuracy is one-vs-rest: (TP + TN) / total; undefined ratios are reported as 0 "
                  "with a flag";
    doc["total"] = m.total;
    doc["accuracy"] = m.accuracy;
    doc["macro_f1"] = m.macro_f1;
    doc["mcc"] = m.mcc;
    doc["mcc_undefined"] = m.mcc_undefined;
    json classes = json::array();
    for (const auto &c : m.per_class) {
        classes.push_back(json{{"class", c.name},
                               {"support", c.support},
                               {"accuracy", c.accuracy},
                               {"precision", c.precision},
                               {"recall", c.recall},
                               {"f1", c.f1},
                               {"precision_undefined", c.precision_undefined},
                               {"recall_undefined", c.recall_undefined},
                               {"f1_undefined", c.f1_undefined}});
    }
    doc["per_class"] = std::move(classes);
    doc["confusion"] = {{"classes", cm.classes}, {"counts", cm.counts}};
    return doc.dump(2) + "\n";
}

std::string metrics_table(const ConfusionMatrix &cm, const MetricsReport &m) {
    std::size_t width = 7;
    for (const auto &c : cm.classes) width = std::max(width, c.size());
    std::ostringstream out;
    out << "# per-class accuracy is one-vs-rest; '*' marks a zero-denominator ratio reported as 0\n";
    out << std::left << std::setw(static_cast<int>(width)) << "class" << std::right << std::setw(9) << "support"
        << std::setw(10) << "accuracy" << std::setw(11) << "precision" << std::setw(10) << "recall"
        << std::setw(10) << "f1" << '\n';
    out << std::fixed << std::setprecision(4);
    auto cell = [&](double v, bool undefined, int w) {
        std::ostringstream c;
        c << std::fixed << std::setprecision(4) << v << (undefined ? "*" : "");
        out << std::setw(w) << c.str();
    };
    for (const auto &c : m.per_class) {
        out << std::left << std::setw(static_cast<int>(width)) << c.name << std::right << std::setw(9)
            << c.support;
        cell(c.accuracy, false, 10);
        cell(c.precision, c.precision_undefined, 11);
        cell(c.recall, c.recall_undefined, 10);
        cell(c.f1, c.f1_undefined, 10);
        out << '\n';
    }
    out << '\n'
        << "samples   " << m.total << '\n'
        << "accuracy  " << m.accuracy << '\n'
        << "macro_f1  " << m.macro_f1 << '\n'
        << "mcc       " << m.mcc << (m.mcc_undefined ? "*" : "") << '\n';
    return out.str();
}

std::string confusion_csv(const ConfusionMatrix &cm) {
    std::ostringstream out;
    out << "true\\predicted";
    for (const auto &c : cm.classes) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        out << cm.classes[i];
        for (auto v : cm.counts[i]) out << ',' << v;
        out << '\n';
    }
    return out.str();
}

}  // namespace callgram
