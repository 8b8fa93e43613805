#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aptshield/matrix.hpp"

namespace aptshield::sae {

enum class ThresholdMode { MeanPhi, QuartileV };

// Adaptive sparsity settings. R suppresses low-activity units, E excites
// high-activity ones; the pivot between the two regimes is either the mean
// activity or the log-quartile critical value.
struct SparsityConfig {
    double R = 0.5;                               // 0 < R < 1
    double E = 0.2;                               // 0 < E < 0.5
    ThresholdMode threshold_mode = ThresholdMode::QuartileV;
    double beta = 0.1;                            // sparsity penalty weight
    double clamp_eps = 1e-3;

    void validate() const;
};

// Median activation of one hidden unit over its per-sample outputs.
double neuron_activity(std::vector<double> samples);

// Mean of the per-unit activities.
double mean_activity(const std::vector<double>& activities);

// Critical value V: weighted lower quartile of the log-activities mapped
// back through exp. Every element must lie strictly in (0,1); indices are
// clamped to [1, n] so sequences shorter than 4 stay defined.
double quartile_threshold(const std::vector<double>& activities);

// Per-unit sparsity targets: R*M below the pivot, M+E at or above it,
// clamped into [clamp_eps, 1-clamp_eps].
std::vector<double> sparsity_vector(const std::vector<double>& activities,
                                    double threshold,
                                    const SparsityConfig& cfg);

struct TrainLogEntry {
    std::size_t epoch;
    double loss;
};

struct SparseAEModel {
    num::Matrix w_enc;          // d_in x d_hidden
    std::vector<double> b_enc;  // d_hidden
    num::Matrix w_dec;          // d_hidden x d_in
    std::vector<double> b_dec;  // d_in
    SparsityConfig config;
    // Copied from the training FeatureMatrix so encode-time inputs can be
    // normalized identically.
    std::vector<std::pair<double, double>> norm_params;

    std::size_t d_in() const { return w_enc.rows(); }
    std::size_t d_hidden() const { return w_enc.cols(); }

    // Flat parameter vector [w_enc | b_enc | w_dec | b_dec], row-major.
    std::vector<double> pack_params() const;
    void unpack_params(const std::vector<double>& p);
};

struct AeForwardResult {
    num::Matrix hidden;
    num::Matrix reconstruction;
};

// hidden = sigmoid(X*W_enc + b_enc); reconstruction = sigmoid(hidden*W_dec + b_dec).
AeForwardResult ae_forward(const SparseAEModel& model, const num::Matrix& x);

struct AeLossResult {
    double loss;
    std::vector<double> grads;    // layout matches pack_params()
    std::vector<double> targets;  // the sparsity vector P used by the penalty
};

// Mean squared reconstruction error plus beta * sum_j KL(p_j || rho_j),
// where rho_j is the batch-mean activation of hidden unit j and P is
// recomputed from the batch (activity -> pivot -> sparsity_vector) and held
// constant under differentiation.
AeLossResult ae_loss(const SparseAEModel& model, const num::Matrix& x,
                     const SparsityConfig& cfg);

// Same objective with the target vector supplied by the caller; this is the
// fixed-P surface the gradients are exact for.
AeLossResult ae_loss_with_targets(const SparseAEModel& model,
                                  const num::Matrix& x,
                                  const SparsityConfig& cfg,
                                  const std::vector<double>& targets);

struct AeHyper {
    std::size_t d_hidden = 8;
    std::size_t epochs = 1500;
    std::size_t batch_size = 0;  // 0 = full batch
    double learning_rate = 2.0;
    std::uint64_t seed = 1;
};

struct AeTrainResult {
    SparseAEModel model;
    std::vector<TrainLogEntry> log;  // one entry per epoch (mean batch loss)
};

// Seeded uniform init in [-r, r] with r = sqrt(6/(d_in+d_hidden)), then
// gradient descent on ae_loss over sequential mini-batches.
AeTrainResult train_ae(const num::Matrix& x, const SparsityConfig& cfg,
                       const AeHyper& hyper);

// The latent codes (hidden activations) only.
num::Matrix encode(const SparseAEModel& model, const num::Matrix& x);

// Textual container with magic "APTSHIELD-AE"; reload reproduces encode
// outputs bit-exactly.
void save_model(const SparseAEModel& model, const std::string& path);
SparseAEModel load_model(const std::string& path);

const char* threshold_mode_name(ThresholdMode mode);
ThresholdMode threshold_mode_from_name(const std::string& name);

}  // namespace aptshield::sae
