#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aptshield/matrix.hpp"

namespace aptshield::detect {

struct LinearClassifier {
    num::Matrix w;                         // k x C
    std::vector<double> b;                 // C
    std::vector<std::string> class_labels; // ordered label set

    std::size_t n_classes() const { return class_labels.size(); }
};

struct ClfHyper {
    std::size_t epochs = 2000;
    double learning_rate = 2.0;
    std::uint64_t seed = 1;
};

struct ClfTrainLogEntry {
    std::size_t epoch;
    double loss;
};

struct ClfTrainResult {
    LinearClassifier clf;
    std::vector<ClfTrainLogEntry> log;
};

// Multinomial logistic regression trained by gradient descent on softmax
// cross-entropy. Needs at least two distinct labels.
ClfTrainResult train_classifier(const num::Matrix& codes,
                                const std::vector<std::string>& labels,
                                const ClfHyper& hyper);

struct Prediction {
    std::vector<std::string> labels;
    num::Matrix probabilities;  // rows sum to 1
};

Prediction predict(const LinearClassifier& clf, const num::Matrix& codes);

struct RocPoint {
    double fpr;
    double tpr;
    double threshold;
};

struct MetricsReport {
    std::vector<std::string> class_labels;
    std::vector<std::vector<std::size_t>> confusion;  // [true][pred]
    double accuracy = 0.0;
    std::vector<double> precision;  // per class
    std::vector<double> recall;     // per class
    std::vector<RocPoint> roc_points;
    std::optional<double> auc;  // absent when only one binary class occurs
};

// Confusion matrix and accuracy/precision/recall over the label set, plus a
// binary intrusion-vs-normal ROC/AUC from positive_scores (the positive
// class is any label other than normal_label). ROC thresholds sweep the
// distinct scores with the predicate score >= threshold; AUC is trapezoidal.
MetricsReport evaluate(const std::vector<std::string>& pred_labels,
                       const std::vector<std::string>& true_labels,
                       const std::vector<double>& positive_scores,
                       const std::string& normal_label = "normal");

nlohmann::json metrics_to_json(const MetricsReport& report);
void save_roc_csv(const MetricsReport& report, const std::string& path);

// Textual container with magic "APTSHIELD-CLF".
void save_model(const LinearClassifier& clf, const std::string& path);
LinearClassifier load_model(const std::string& path);

}  // namespace aptshield::detect
