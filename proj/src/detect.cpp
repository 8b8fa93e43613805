#include "aptshield/detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "aptshield/errors.hpp"
#include "aptshield/rng.hpp"
#include "aptshield/serialize.hpp"

namespace aptshield::detect {

namespace {

// Row-wise stable softmax of codes*W + b.
num::Matrix softmax_probs(const LinearClassifier& clf, const num::Matrix& codes) {
    num::Matrix logits =
        num::add_row_broadcast(num::matmul(codes, clf.w), clf.b);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto row = logits.row(i);
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double& v : row) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : row) v /= sum;
    }
    return logits;
}

}  // namespace

ClfTrainResult train_classifier(const num::Matrix& codes,
                                const std::vector<std::string>& labels,
                                const ClfHyper& hyper) {
    if (codes.rows() != labels.size()) {
        throw ShapeError("train_classifier: " + std::to_string(codes.rows()) +
                         " rows vs " + std::to_string(labels.size()) +
                         " labels");
    }
    if (hyper.epochs < 1) {
        throw DomainError("train_classifier: epochs must be >= 1");
    }
    const std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) {
        throw DomainError("train_classifier: need at least 2 distinct labels, got " +
                          std::to_string(distinct.size()));
    }

    ClfTrainResult result;
    LinearClassifier& clf = result.clf;
    clf.class_labels.assign(distinct.begin(), distinct.end());
    const std::size_t c = clf.class_labels.size();
    const std::size_t k = codes.cols();
    const std::size_t n = codes.rows();

    std::map<std::string, std::size_t> class_index;
    for (std::size_t i = 0; i < c; ++i) class_index[clf.class_labels[i]] = i;
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = class_index.at(labels[i]);

    clf.w = num::Matrix(k, c);
    clf.b.assign(c, 0.0);
    num::Rng rng(hyper.seed);
    const double r = std::sqrt(6.0 / static_cast<double>(k + c));
    for (std::size_t i = 0; i < clf.w.size(); ++i) {
        clf.w.data()[i] = rng.uniform(-r, r);
    }

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        num::Matrix probs = softmax_probs(clf, codes);
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            loss -= std::log(std::max(probs(i, y[i]), 1e-300));
        }
        loss /= static_cast<double>(n);
        if (!std::isfinite(loss)) {
            throw NumericError("train_classifier: non-finite loss at epoch " +
                               std::to_string(epoch));
        }
        result.log.push_back({epoch, loss});

        // dlogits = (P - Y) / n
        for (std::size_t i = 0; i < n; ++i) probs(i, y[i]) -= 1.0;
        num::Matrix dlogits = num::scale(probs, 1.0 / static_cast<double>(n));
        const num::Matrix gw = num::matmul(num::transpose(codes), dlogits);
        const std::vector<double> gb = num::column_sums(dlogits);
        num::axpy_in_place(clf.w, -hyper.learning_rate, gw);
        for (std::size_t j = 0; j < c; ++j) {
            clf.b[j] -= hyper.learning_rate * gb[j];
        }
    }
    return result;
}

Prediction predict(const LinearClassifier& clf, const num::Matrix& codes) {
    if (codes.cols() != clf.w.rows()) {
        throw ShapeError("predict: code width " + std::to_string(codes.cols()) +
                         " vs classifier input " + std::to_string(clf.w.rows()));
    }
    Prediction out;
    out.probabilities = softmax_probs(clf, codes);
    out.labels.reserve(codes.rows());
    for (std::size_t i = 0; i < codes.rows(); ++i) {
        const auto row = out.probabilities.row(i);
        const std::size_t arg =
            std::max_element(row.begin(), row.end()) - row.begin();
        out.labels.push_back(clf.class_labels[arg]);
    }
    return out;
}

MetricsReport evaluate(const std::vector<std::string>& pred_labels,
                       const std::vector<std::string>& true_labels,
                       const std::vector<double>& positive_scores,
                       const std::string& normal_label) {
    if (pred_labels.size() != true_labels.size() ||
        positive_scores.size() != true_labels.size()) {
        throw ShapeError("evaluate: predictions, labels and scores must have "
                         "equal lengths");
    }
    const std::size_t n = true_labels.size();
    if (n == 0) throw DomainError("evaluate: empty input");

    MetricsReport report;
    std::set<std::string> classes(true_labels.begin(), true_labels.end());
    classes.insert(pred_labels.begin(), pred_labels.end());
    report.class_labels.assign(classes.begin(), classes.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < report.class_labels.size(); ++i) {
        index[report.class_labels[i]] = i;
    }
    const std::size_t c = report.class_labels.size();
    report.confusion.assign(c, std::vector<std::size_t>(c, 0));
    for (std::size_t i = 0; i < n; ++i) {
        report.confusion[index.at(true_labels[i])][index.at(pred_labels[i])]++;
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < c; ++i) correct += report.confusion[i][i];
    report.accuracy = static_cast<double>(correct) / static_cast<double>(n);

    report.precision.assign(c, 0.0);
    report.recall.assign(c, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
        std::size_t col = 0, row = 0;
        for (std::size_t j = 0; j < c; ++j) {
            col += report.confusion[j][i];
            row += report.confusion[i][j];
        }
        if (col > 0) {
            report.precision[i] = static_cast<double>(report.confusion[i][i]) /
                                  static_cast<double>(col);
        }
        if (row > 0) {
            report.recall[i] = static_cast<double>(report.confusion[i][i]) /
                               static_cast<double>(row);
        }
    }

    // Binary ROC: positive = intrusion (any non-normal true label).
    std::size_t pos = 0;
    for (const auto& t : true_labels) {
        if (t != normal_label) ++pos;
    }
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) return report;  // ROC undefined; auc stays empty

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return positive_scores[a] > positive_scores[b];
    });

    const double max_score = positive_scores[order.front()];
    report.roc_points.push_back({0.0, 0.0, max_score + 1.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        const double s = positive_scores[order[i]];
        // Consume the whole tie group before emitting a point.
        while (i < n && positive_scores[order[i]] == s) {
            if (true_labels[order[i]] != normal_label) {
                ++tp;
            } else {
                ++fp;
            }
            ++i;
        }
        report.roc_points.push_back({static_cast<double>(fp) / neg,
                                     static_cast<double>(tp) / pos, s});
    }

    double auc = 0.0;
    for (std::size_t p = 1; p < report.roc_points.size(); ++p) {
        const auto& a = report.roc_points[p - 1];
        const auto& b = report.roc_points[p];
        auc += (b.fpr - a.fpr) * (b.tpr + a.tpr) / 2.0;
    }
    report.auc = auc;
    return report;
}

nlohmann::json metrics_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["class_labels"] = report.class_labels;
    j["confusion"] = report.confusion;
    j["accuracy"] = report.accuracy;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    if (report.auc) j["auc"] = *report.auc;
    nlohmann::json roc = nlohmann::json::array();
    for (const auto& p : report.roc_points) {
        roc.push_back({p.fpr, p.tpr, p.threshold});
    }
    j["roc_points"] = roc;
    return j;
}

void save_roc_csv(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write ROC csv: " + path);
    out << "fpr,tpr,threshold\n";
    for (const auto& p : report.roc_points) {
        out << io::fmt(p.fpr) << "," << io::fmt(p.tpr) << ","
            << io::fmt(p.threshold) << "\n";
    }
}

void save_model(const LinearClassifier& clf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << "APTSHIELD-CLF 1\n";
    out << "classes " << clf.class_labels.size() << "\n";
    for (const auto& label : clf.class_labels) out << label << "\n";
    io::write_matrix(out, "w", clf.w);
    io::write_vector(out, "b", clf.b);
}

LinearClassifier load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    io::expect_magic(in, "APTSHIELD-CLF", 1, path);
    LinearClassifier clf;
    const auto c = io::read_sized<std::size_t>(in, "classes", path);
    std::string line;
    std::getline(in, line);  // finish the header line
    clf.class_labels.resize(c);
    for (auto& label : clf.class_labels) {
        if (!std::getline(in, label)) {
            throw DataError(path + ": truncated class label list");
        }
    }
    clf.w = io::read_matrix(in, "w", path);
    clf.b = io::read_vector(in, "b", path);
    if (clf.w.cols() != c || clf.b.size() != c) {
        throw DataError(path + ": inconsistent classifier dimensions");
    }
    return clf;
}

}  // namespace aptshield::detect
