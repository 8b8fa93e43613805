#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aptshield/matrix.hpp"

namespace aptshield::gae {

// Undirected graph with binary adjacency (symmetric, zero diagonal) and
// per-node features.
struct GraphData {
    num::Matrix adjacency;  // n x n
    num::Matrix features;   // n x d

    std::size_t n() const { return adjacency.rows(); }
    void validate() const;
};

struct GAEModel {
    num::Matrix w0;      // d x h
    num::Matrix w1;      // h x k
    num::Matrix a_norm;  // cached normalized adjacency, n x n
};

// Symmetric renormalization D^{-1/2} (A+I) D^{-1/2}. Input must be square,
// symmetric, binary with zero diagonal.
num::Matrix normalize_adjacency(const num::Matrix& a);

// Two-layer GCN: Z = A_norm * ReLU(A_norm * X * W0) * W1.
num::Matrix gae_encode(const GAEModel& model, const num::Matrix& x);

// Inner-product decoder: sigmoid(Z * Z^T). Entries are nudged inside (0,1)
// so logs stay finite even for saturated embeddings.
num::Matrix gae_decode(const num::Matrix& z);

// Ratio of off-diagonal non-edges to edges; DomainError when edgeless.
double default_pos_weight(const num::Matrix& a);

// Weighted binary cross-entropy over all off-diagonal pairs.
double gae_loss(const num::Matrix& a, const num::Matrix& a_hat,
                double pos_weight);

struct GaeLossResult {
    double loss;
    num::Matrix grad_w0;
    num::Matrix grad_w1;
};

// Loss plus exact gradients through decoder and both GCN layers.
GaeLossResult gae_loss_grads(const GAEModel& model, const GraphData& g,
                             double pos_weight);

struct GaeHyper {
    std::size_t hidden = 16;  // h
    std::size_t embed = 8;    // k
    std::size_t epochs = 200;
    double learning_rate = 0.1;
    std::uint64_t seed = 1;
};

struct GaeTrainLogEntry {
    std::size_t epoch;
    double loss;
};

struct GaeTrainResult {
    GAEModel model;
    std::vector<GaeTrainLogEntry> log;
};

// Seeded uniform init, full-batch gradient descent on the reconstruction loss.
GaeTrainResult train_gae(const GraphData& g, const GaeHyper& hyper);

// Reconstructed edge probabilities for the requested node pairs.
std::vector<double> link_scores(const GAEModel& model, const GraphData& g,
                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// Mean reconstruction BCE of node i's adjacency row (off-diagonal);
// higher means more anomalous.
double node_anomaly_score(const GAEModel& model, const GraphData& g,
                          std::size_t i);

// Textual container with magic "APTSHIELD-GAE".
void save_model(const GAEModel& model, const std::string& path);
GAEModel load_model(const std::string& path);

}  // namespace aptshield::gae
