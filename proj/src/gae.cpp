#include "aptshield/gae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "aptshield/errors.hpp"
#include "aptshield/rng.hpp"
#include "aptshield/serialize.hpp"

namespace aptshield::gae {

namespace {

// Keeps reconstructed probabilities strictly inside (0,1) in floating point.
constexpr double kProbEps = 1e-12;

void require_binary_symmetric(const num::Matrix& a) {
    if (a.rows() != a.cols()) {
        throw DomainError("adjacency must be square, got " + a.shape_str());
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (a(i, i) != 0.0) {
            throw DomainError("adjacency diagonal must be zero at node " +
                              std::to_string(i));
        }
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double v = a(i, j);
            if (v != 0.0 && v != 1.0) {
                throw DomainError("adjacency entries must be 0 or 1");
            }
            if (v != a(j, i)) {
                throw DomainError("adjacency must be symmetric");
            }
        }
    }
}

}  // namespace

void GraphData::validate() const {
    require_binary_symmetric(adjacency);
    if (features.rows() != adjacency.rows()) {
        throw DomainError("feature rows " + std::to_string(features.rows()) +
                          " do not match node count " +
                          std::to_string(adjacency.rows()));
    }
}

num::Matrix normalize_adjacency(const num::Matrix& a) {
    require_binary_symmetric(a);
    const std::size_t n = a.rows();
    std::vector<double> inv_sqrt_deg(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 1.0;  // self loop from A+I
        for (std::size_t j = 0; j < n; ++j) deg += a(i, j);
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
    }
    num::Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double aij = (i == j) ? 1.0 : a(i, j);
            out(i, j) = aij * inv_sqrt_deg[i] * inv_sqrt_deg[j];
        }
    }
    return out;
}

num::Matrix gae_encode(const GAEModel& model, const num::Matrix& x) {
    if (x.rows() != model.a_norm.rows()) {
        throw ShapeError("gae_encode: feature rows " +
                         std::to_string(x.rows()) + " vs graph size " +
                         std::to_string(model.a_norm.rows()));
    }
    if (x.cols() != model.w0.rows()) {
        throw ShapeError("gae_encode: feature cols " +
                         std::to_string(x.cols()) + " vs W0 rows " +
                         std::to_string(model.w0.rows()));
    }
    const num::Matrix h = num::apply_activation(
        num::matmul(num::matmul(model.a_norm, x), model.w0),
        num::Activation::Relu);
    return num::matmul(num::matmul(model.a_norm, h), model.w1);
}

num::Matrix gae_decode(const num::Matrix& z) {
    z.require_finite("embedding");
    num::Matrix s = num::matmul(z, num::transpose(z));
    num::Matrix out(s.rows(), s.cols());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.data()[i] =
            std::clamp(num::sigmoid(s.data()[i]), kProbEps, 1.0 - kProbEps);
    }
    return out;
}

double default_pos_weight(const num::Matrix& a) {
    require_binary_symmetric(a);
    const std::size_t n = a.rows();
    std::size_t edges = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && a(i, j) == 1.0) ++edges;
        }
    }
    if (edges == 0) throw DomainError("graph has no edges; pos_weight undefined");
    const std::size_t pairs = n * (n - 1);
    return static_cast<double>(pairs - edges) / static_cast<double>(edges);
}

double gae_loss(const num::Matrix& a, const num::Matrix& a_hat,
                double pos_weight) {
    if (!a.same_shape(a_hat)) {
        throw ShapeError("gae_loss: shape mismatch " + a.shape_str() + " vs " +
                         a_hat.shape_str());
    }
    const std::size_t n = a.rows();
    if (n < 2) throw DomainError("gae_loss: need at least 2 nodes");
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double p = a_hat(i, j);
            loss -= a(i, j) == 1.0 ? pos_weight * std::log(p)
                                   : std::log(1.0 - p);
        }
    }
    loss /= static_cast<double>(n * (n - 1));
    if (!std::isfinite(loss)) throw NumericError("gae_loss: non-finite loss");
    return loss;
}

GaeLossResult gae_loss_grads(const GAEModel& model, const GraphData& g,
                             double pos_weight) {
    g.validate();
    const std::size_t n = g.n();
    const auto& x = g.features;

    // Forward pass, keeping intermediates for the backward sweep.
    const num::Matrix ax = num::matmul(model.a_norm, x);
    const num::Matrix pre = num::matmul(ax, model.w0);
    const num::Matrix h = num::apply_activation(pre, num::Activation::Relu);
    const num::Matrix ah = num::matmul(model.a_norm, h);
    const num::Matrix z = num::matmul(ah, model.w1);
    const num::Matrix a_hat = gae_decode(z);

    GaeLossResult out;
    out.loss = gae_loss(g.adjacency, a_hat, pos_weight);

    // d(loss)/d(Z Z^T): (1/N) [(1-A) .* A_hat - pw * A .* (1-A_hat)],
    // zero diagonal.
    const double inv_pairs = 1.0 / static_cast<double>(n * (n - 1));
    num::Matrix g_s(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double p = a_hat(i, j);
            g_s(i, j) = g.adjacency(i, j) == 1.0
                            ? -pos_weight * (1.0 - p) * inv_pairs
                            : p * inv_pairs;
        }
    }
    // dZ = (G + G^T) Z; G is symmetric here but keep the general form.
    const num::Matrix g_z =
        num::matmul(num::add(g_s, num::transpose(g_s)), z);

    out.grad_w1 = num::matmul(num::transpose(ah), g_z);
    num::Matrix g_h = num::matmul(num::matmul(model.a_norm, g_z),
                                  num::transpose(model.w1));
    for (std::size_t i = 0; i < g_h.size(); ++i) {
        if (pre.data()[i] <= 0.0) g_h.data()[i] = 0.0;
    }
    out.grad_w0 = num::matmul(num::transpose(ax), g_h);
    return out;
}

GaeTrainResult train_gae(const GraphData& g, const GaeHyper& hyper) {
    g.validate();
    if (hyper.epochs < 1) throw DomainError("train_gae: epochs must be >= 1");
    if (hyper.hidden < 1 || hyper.embed < 1) {
        throw DomainError("train_gae: layer widths must be >= 1");
    }
    const double pos_weight = default_pos_weight(g.adjacency);  // needs >= 1 edge

    const std::size_t d = g.features.cols();
    GaeTrainResult result;
    GAEModel& model = result.model;
    model.a_norm = normalize_adjacency(g.adjacency);
    model.w0 = num::Matrix(d, hyper.hidden);
    model.w1 = num::Matrix(hyper.hidden, hyper.embed);

    num::Rng rng(hyper.seed);
    const double r0 = std::sqrt(6.0 / static_cast<double>(d + hyper.hidden));
    for (std::size_t i = 0; i < model.w0.size(); ++i) {
        model.w0.data()[i] = rng.uniform(-r0, r0);
    }
    const double r1 =
        std::sqrt(6.0 / static_cast<double>(hyper.hidden + hyper.embed));
    for (std::size_t i = 0; i < model.w1.size(); ++i) {
        model.w1.data()[i] = rng.uniform(-r1, r1);
    }

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        GaeLossResult lr;
        try {
            lr = gae_loss_grads(model, g, pos_weight);
        } catch (const NumericError& e) {
            throw NumericError("train_gae: epoch " + std::to_string(epoch) +
                               ": " + e.what());
        }
        num::axpy_in_place(model.w0, -hyper.learning_rate, lr.grad_w0);
        num::axpy_in_place(model.w1, -hyper.learning_rate, lr.grad_w1);
        result.log.push_back({epoch, lr.loss});
    }
    return result;
}

std::vector<double> link_scores(
    const GAEModel& model, const GraphData& g,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    g.validate();
    const std::size_t n = g.n();
    for (const auto& [i, j] : pairs) {
        if (i >= n || j >= n) {
            throw DomainError("link_scores: node index out of range: (" +
                              std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
    const num::Matrix a_hat = gae_decode(gae_encode(model, g.features));
    std::vector<double> scores;
    scores.reserve(pairs.size());
    for (const auto& [i, j] : pairs) scores.push_back(a_hat(i, j));
    return scores;
}

double node_anomaly_score(const GAEModel& model, const GraphData& g,
                          std::size_t i) {
    g.validate();
    const std::size_t n = g.n();
    if (i >= n) {
        throw DomainError("node_anomaly_score: node index " +
                          std::to_string(i) + " out of range");
    }
    if (n < 2) throw DomainError("node_anomaly_score: need at least 2 nodes");
    const num::Matrix a_hat = gae_decode(gae_encode(model, g.features));
    double score = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double p = a_hat(i, j);
        score -= g.adjacency(i, j) == 1.0 ? std::log(p) : std::log(1.0 - p);
    }
    return score / static_cast<double>(n - 1);
}

void save_model(const GAEModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << "APTSHIELD-GAE 1\n";
    io::write_matrix(out, "w0", model.w0);
    io::write_matrix(out, "w1", model.w1);
    io::write_matrix(out, "a_norm", model.a_norm);
}

GAEModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    io::expect_magic(in, "APTSHIELD-GAE", 1, path);
    GAEModel model;
    model.w0 = io::read_matrix(in, "w0", path);
    model.w1 = io::read_matrix(in, "w1", path);
    model.a_norm = io::read_matrix(in, "a_norm", path);
    if (model.w0.cols() != model.w1.rows() ||
        model.a_norm.rows() != model.a_norm.cols()) {
        throw DataError(path + ": inconsistent model dimensions");
    }
    return model;
}

}  // namespace aptshield::gae
