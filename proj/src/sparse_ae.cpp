#include "aptshield/sparse_ae.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "aptshield/errors.hpp"
#include "aptshield/rng.hpp"
#include "aptshield/serialize.hpp"

namespace aptshield::sae {

void SparsityConfig::validate() const {
    if (!(R > 0.0 && R < 1.0)) {
        throw DomainError("sparsity config: R must be in (0,1), got " +
                          std::to_string(R));
    }
    if (!(E > 0.0 && E < 0.5)) {
        throw DomainError("sparsity config: E must be in (0,0.5), got " +
                          std::to_string(E));
    }
    if (beta < 0.0) throw DomainError("sparsity config: beta must be >= 0");
    if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) {
        throw DomainError("sparsity config: clamp_eps must be in (0,0.5)");
    }
}

double neuron_activity(std::vector<double> samples) {
    if (samples.empty()) throw DomainError("neuron_activity: empty sample set");
    std::sort(samples.begin(), samples.end());
    const std::size_t m = samples.size();
    if (m % 2 == 1) return samples[m / 2];
    return (samples[m / 2 - 1] + samples[m / 2]) / 2.0;
}

double mean_activity(const std::vector<double>& activities) {
    if (activities.empty()) throw DomainError("mean_activity: empty vector");
    const double sum =
        std::accumulate(activities.begin(), activities.end(), 0.0);
    return sum / static_cast<double>(activities.size());
}

double quartile_threshold(const std::vector<double>& activities) {
    if (activities.empty()) throw DomainError("quartile_threshold: empty set");
    std::vector<double> logs;
    logs.reserve(activities.size());
    for (double a : activities) {
        if (!(a > 0.0 && a < 1.0)) {
            throw DomainError("quartile_threshold: element " +
                              std::to_string(a) + " outside (0,1)");
        }
        logs.push_back(std::log(a));
    }
    std::sort(logs.begin(), logs.end());
    const double n = static_cast<double>(logs.size());
    const double k = 0.25 * (n + 1.0);
    auto clamp_index = [&](double idx) {
        // 1-based index clamped to [1, n].
        return static_cast<std::size_t>(std::clamp(idx, 1.0, n)) - 1;
    };
    const double lower = logs[clamp_index(std::floor(k))];
    const double upper = logs[clamp_index(std::ceil(k))];
    return std::exp(0.75 * lower + 0.25 * upper);
}

std::vector<double> sparsity_vector(const std::vector<double>& activities,
                                    double threshold,
                                    const SparsityConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(threshold)) {
        throw DomainError("sparsity_vector: threshold is not finite");
    }
    std::vector<double> p;
    p.reserve(activities.size());
    for (double m : activities) {
        // Boundary M == threshold goes to the excitation branch.
        const double raw = m < threshold ? cfg.R * m : m + cfg.E;
        p.push_back(std::clamp(raw, cfg.clamp_eps, 1.0 - cfg.clamp_eps));
    }
    return p;
}

std::vector<double> SparseAEModel::pack_params() const {
    std::vector<double> p;
    p.reserve(w_enc.size() + b_enc.size() + w_dec.size() + b_dec.size());
    p.insert(p.end(), w_enc.data(), w_enc.data() + w_enc.size());
    p.insert(p.end(), b_enc.begin(), b_enc.end());
    p.insert(p.end(), w_dec.data(), w_dec.data() + w_dec.size());
    p.insert(p.end(), b_dec.begin(), b_dec.end());
    return p;
}

void SparseAEModel::unpack_params(const std::vector<double>& p) {
    const std::size_t expect =
        w_enc.size() + b_enc.size() + w_dec.size() + b_dec.size();
    if (p.size() != expect) {
        throw ShapeError("unpack_params: expected " + std::to_string(expect) +
                         " parameters, got " + std::to_string(p.size()));
    }
    std::size_t off = 0;
    std::copy(p.begin() + off, p.begin() + off + w_enc.size(), w_enc.data());
    off += w_enc.size();
    std::copy(p.begin() + off, p.begin() + off + b_enc.size(), b_enc.begin());
    off += b_enc.size();
    std::copy(p.begin() + off, p.begin() + off + w_dec.size(), w_dec.data());
    off += w_dec.size();
    std::copy(p.begin() + off, p.begin() + off + b_dec.size(), b_dec.begin());
}

AeForwardResult ae_forward(const SparseAEModel& model, const num::Matrix& x) {
    if (x.cols() != model.d_in()) {
        throw ShapeError("ae_forward: input has " + std::to_string(x.cols()) +
                         " columns, model expects " +
                         std::to_string(model.d_in()));
    }
    AeForwardResult r;
    r.hidden = num::apply_activation(
        num::add_row_broadcast(num::matmul(x, model.w_enc), model.b_enc),
        num::Activation::Sigmoid);
    r.reconstruction = num::apply_activation(
        num::add_row_broadcast(num::matmul(r.hidden, model.w_dec), model.b_dec),
        num::Activation::Sigmoid);
    return r;
}

AeLossResult ae_loss_with_targets(const SparseAEModel& model,
                                  const num::Matrix& x,
                                  const SparsityConfig& cfg,
                                  const std::vector<double>& targets) {
    cfg.validate();
    const std::size_t h = model.d_hidden();
    if (targets.size() != h) {
        throw ShapeError("ae_loss: target vector length " +
                         std::to_string(targets.size()) + " vs d_hidden " +
                         std::to_string(h));
    }
    const auto fwd = ae_forward(model, x);
    const auto& hid = fwd.hidden;
    const auto& rec = fwd.reconstruction;
    const double n = static_cast<double>(x.rows());
    const double d = static_cast<double>(x.cols());

    // Reconstruction term: mean over all entries of the squared error.
    const num::Matrix diff = num::sub(rec, x);
    double loss = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        loss += diff.data()[i] * diff.data()[i];
    }
    loss /= n * d;

    // Batch-mean activation per hidden unit, clamped away from {0,1}.
    std::vector<double> rho = num::column_sums(hid);
    std::vector<bool> rho_clamped(h, false);
    for (std::size_t j = 0; j < h; ++j) {
        rho[j] /= n;
        const double clamped =
            std::clamp(rho[j], cfg.clamp_eps, 1.0 - cfg.clamp_eps);
        rho_clamped[j] = clamped != rho[j];
        rho[j] = clamped;
    }
    for (std::size_t j = 0; j < h; ++j) {
        const double p = targets[j];
        loss += cfg.beta * (p * std::log(p / rho[j]) +
                            (1.0 - p) * std::log((1.0 - p) / (1.0 - rho[j])));
    }
    if (!std::isfinite(loss)) throw NumericError("ae_loss: non-finite loss");

    // Backward pass, P held constant.
    num::Matrix delta2 = num::scale(diff, 2.0 / (n * d));
    for (std::size_t i = 0; i < delta2.size(); ++i) {
        const double a = rec.data()[i];
        delta2.data()[i] *= a * (1.0 - a);
    }
    const num::Matrix g_wdec = num::matmul(num::transpose(hid), delta2);
    std::vector<double> g_bdec = num::column_sums(delta2);

    num::Matrix dhid = num::matmul(delta2, num::transpose(model.w_dec));
    for (std::size_t j = 0; j < h; ++j) {
        if (rho_clamped[j]) continue;  // flat region of the clamp
        const double p = targets[j];
        const double dkl =
            cfg.beta * (-p / rho[j] + (1.0 - p) / (1.0 - rho[j])) / n;
        for (std::size_t i = 0; i < dhid.rows(); ++i) dhid(i, j) += dkl;
    }
    for (std::size_t i = 0; i < dhid.size(); ++i) {
        const double a = hid.data()[i];
        dhid.data()[i] *= a * (1.0 - a);
    }
    const num::Matrix g_wenc = num::matmul(num::transpose(x), dhid);
    std::vector<double> g_benc = num::column_sums(dhid);

    AeLossResult out;
    out.loss = loss;
    out.targets = targets;
    out.grads.reserve(g_wenc.size() + g_benc.size() + g_wdec.size() +
                      g_bdec.size());
    out.grads.insert(out.grads.end(), g_wenc.data(),
                     g_wenc.data() + g_wenc.size());
    out.grads.insert(out.grads.end(), g_benc.begin(), g_benc.end());
    out.grads.insert(out.grads.end(), g_wdec.data(),
                     g_wdec.data() + g_wdec.size());
    out.grads.insert(out.grads.end(), g_bdec.begin(), g_bdec.end());
    return out;
}

AeLossResult ae_loss(const SparseAEModel& model, const num::Matrix& x,
                     const SparsityConfig& cfg) {
    const auto fwd = ae_forward(model, x);
    const auto& hid = fwd.hidden;
    const std::size_t h = model.d_hidden();

    std::vector<double> activities(h);
    std::vector<double> column(x.rows());
    for (std::size_t j = 0; j < h; ++j) {
        for (std::size_t i = 0; i < hid.rows(); ++i) column[i] = hid(i, j);
        activities[j] = neuron_activity(column);
    }
    const double pivot = cfg.threshold_mode == ThresholdMode::MeanPhi
                             ? mean_activity(activities)
                             : quartile_threshold(activities);
    const auto targets = sparsity_vector(activities, pivot, cfg);
    return ae_loss_with_targets(model, x, cfg, targets);
}

AeTrainResult train_ae(const num::Matrix& x, const SparsityConfig& cfg,
                       const AeHyper& hyper) {
    cfg.validate();
    if (hyper.d_hidden < 1) throw DomainError("train_ae: d_hidden must be >= 1");
    if (hyper.epochs < 1) throw DomainError("train_ae: epochs must be >= 1");
    if (x.rows() == 0) throw DomainError("train_ae: empty training matrix");
    if (hyper.learning_rate <= 0.0) {
        throw DomainError("train_ae: learning_rate must be > 0");
    }

    const std::size_t d_in = x.cols();
    const std::size_t h = hyper.d_hidden;

    AeTrainResult result;
    SparseAEModel& model = result.model;
    model.config = cfg;
    model.w_enc = num::Matrix(d_in, h);
    model.b_enc.assign(h, 0.0);
    model.w_dec = num::Matrix(h, d_in);
    model.b_dec.assign(d_in, 0.0);

    num::Rng rng(hyper.seed);
    const double r = std::sqrt(6.0 / static_cast<double>(d_in + h));
    for (std::size_t i = 0; i < model.w_enc.size(); ++i) {
        model.w_enc.data()[i] = rng.uniform(-r, r);
    }
    for (std::size_t i = 0; i < model.w_dec.size(); ++i) {
        model.w_dec.data()[i] = rng.uniform(-r, r);
    }

    const std::size_t n = x.rows();
    const std::size_t bs =
        (hyper.batch_size == 0 || hyper.batch_size > n) ? n : hyper.batch_size;

    std::vector<double> params = model.pack_params();
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t stop = std::min(start + bs, n);
            num::Matrix batch(stop - start, d_in);
            std::copy(x.data() + start * d_in, x.data() + stop * d_in,
                      batch.data());
            AeLossResult lr;
            try {
                lr = ae_loss(model, batch, cfg);
            } catch (const NumericError& e) {
                throw NumericError("train_ae: epoch " + std::to_string(epoch) +
                                   ": " + e.what());
            }
            epoch_loss += lr.loss;
            ++batches;
            for (std::size_t i = 0; i < params.size(); ++i) {
                params[i] -= hyper.learning_rate * lr.grads[i];
            }
            model.unpack_params(params);
        }
        result.log.push_back({epoch, epoch_loss / static_cast<double>(batches)});
    }
    return result;
}

num::Matrix encode(const SparseAEModel& model, const num::Matrix& x) {
    return ae_forward(model, x).hidden;
}

const char* threshold_mode_name(ThresholdMode mode) {
    return mode == ThresholdMode::MeanPhi ? "mean_phi" : "quartile_v";
}

ThresholdMode threshold_mode_from_name(const std::string& name) {
    if (name == "mean_phi") return ThresholdMode::MeanPhi;
    if (name == "quartile_v") return ThresholdMode::QuartileV;
    throw ConfigError("unknown threshold_mode '" + name + "'");
}

void save_model(const SparseAEModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << "APTSHIELD-AE 1\n";
    out << "d_in " << model.d_in() << "\n";
    out << "d_hidden " << model.d_hidden() << "\n";
    out << "R " << io::fmt(model.config.R) << "\n";
    out << "E " << io::fmt(model.config.E) << "\n";
    out << "threshold_mode " << threshold_mode_name(model.config.threshold_mode)
        << "\n";
    out << "beta " << io::fmt(model.config.beta) << "\n";
    out << "clamp_eps " << io::fmt(model.config.clamp_eps) << "\n";
    out << "norm_params " << model.norm_params.size() << "\n";
    for (const auto& [lo, hi] : model.norm_params) {
        out << io::fmt(lo) << " " << io::fmt(hi) << "\n";
    }
    io::write_matrix(out, "w_enc", model.w_enc);
    io::write_vector(out, "b_enc", model.b_enc);
    io::write_matrix(out, "w_dec", model.w_dec);
    io::write_vector(out, "b_dec", model.b_dec);
}

SparseAEModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    io::expect_magic(in, "APTSHIELD-AE", 1, path);

    SparseAEModel model;
    const std::size_t d_in = io::read_sized<std::size_t>(in, "d_in", path);
    const std::size_t d_hidden =
        io::read_sized<std::size_t>(in, "d_hidden", path);
    model.config.R = io::read_sized<double>(in, "R", path);
    model.config.E = io::read_sized<double>(in, "E", path);
    model.config.threshold_mode =
        threshold_mode_from_name(io::read_word(in, "threshold_mode", path));
    model.config.beta = io::read_sized<double>(in, "beta", path);
    model.config.clamp_eps = io::read_sized<double>(in, "clamp_eps", path);
    const std::size_t np = io::read_sized<std::size_t>(in, "norm_params", path);
    model.norm_params.resize(np);
    for (auto& [lo, hi] : model.norm_params) {
        if (!(in >> lo >> hi)) {
            throw DataError(path + ": truncated norm_params block");
        }
    }
    model.w_enc = io::read_matrix(in, "w_enc", path);
    model.b_enc = io::read_vector(in, "b_enc", path);
    model.w_dec = io::read_matrix(in, "w_dec", path);
    model.b_dec = io::read_vector(in, "b_dec", path);
    if (model.w_enc.rows() != d_in || model.w_enc.cols() != d_hidden ||
        model.w_dec.rows() != d_hidden || model.w_dec.cols() != d_in ||
        model.b_enc.size() != d_hidden || model.b_dec.size() != d_in) {
        throw DataError(path + ": inconsistent model dimensions");
    }
    model.config.validate();
    return model;
}

}  // namespace aptshield::sae
