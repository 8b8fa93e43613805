#include "aptshield/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aptshield/config.hpp"
#include "aptshield/detect.hpp"
#include "aptshield/errors.hpp"
#include "aptshield/gae.hpp"
#include "aptshield/ingest.hpp"
#include "aptshield/intrusion_graph.hpp"
#include "aptshield/scenario.hpp"
#include "aptshield/serialize.hpp"
#include "aptshield/sparse_ae.hpp"

namespace aptshield::cli {

namespace {

namespace fs = std::filesystem;

std::string ensure_run_dir(const RunConfig& cfg) {
    const std::string dir = run_dir(cfg);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create run directory '" + dir +
                        "': " + ec.message());
    }
    std::ofstream out(dir + "/run_config.txt");
    if (!out) throw DataError("cannot write " + dir + "/run_config.txt");
    out << canonical_string(cfg);
    return dir;
}

void require_file(const std::string& path, const std::string& producer) {
    if (!fs::exists(path)) {
        throw DataError("missing " + path + "; run '" + producer + "' first");
    }
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_train_log(const std::vector<std::pair<std::size_t, double>>& log,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "epoch,loss\n";
    for (const auto& [epoch, loss] : log) {
        out << epoch << "," << io::fmt(loss) << "\n";
    }
}

ingest::FlowSchema effective_schema(const RunConfig& cfg) {
    if (cfg.schema_path.empty()) return scenario::flow_schema();
    return ingest::load_schema(cfg.schema_path);
}

bool is_test_row(std::size_t i, int test_tenths) {
    return static_cast<int>(i % 10) >= 10 - test_tenths;
}

struct Split {
    ingest::FlowDataset train;
    ingest::FlowDataset test;
};

Split split_dataset(const ingest::FlowDataset& ds, int test_tenths) {
    Split s;
    s.train.schema = ds.schema;
    s.test.schema = ds.schema;
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        auto& part = is_test_row(i, test_tenths) ? s.test : s.train;
        part.rows.push_back(ds.rows[i]);
        part.labels.push_back(ds.labels[i]);
    }
    return s;
}

nlohmann::json meta_to_json(const ingest::FeatureMatrix& fm) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& mc : fm.column_meta) {
        cols.push_back({{"source", mc.source}, {"category", mc.category}});
    }
    nlohmann::json params = nlohmann::json::array();
    for (const auto& [lo, hi] : fm.norm_params) {
        params.push_back({lo, hi});
    }
    return {{"columns", cols}, {"norm_params", params}};
}

void meta_from_json(const nlohmann::json& j,
                    std::vector<ingest::EncodedColumn>& meta,
                    std::vector<std::pair<double, double>>& params) {
    meta.clear();
    params.clear();
    for (const auto& c : j.at("columns")) {
        meta.push_back({c.at("source").get<std::string>(),
                        c.at("category").get<std::string>()});
    }
    for (const auto& p : j.at("norm_params")) {
        params.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
}

int cmd_scenario(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    const auto out = scenario::generate(cfg.scenario);
    scenario::write_outputs(out, dir);
    std::cout << "wrote " << dir << "/flows.csv (" << out.flows.rows.size()
              << " flows)\n"
              << "wrote " << dir << "/alerts.jsonl (" << out.alerts.size()
              << " alerts)\n"
              << "wrote " << dir << "/topology.cfg\n"
              << "wrote " << dir << "/ground_truth.json\n";
    return 0;
}

int cmd_preprocess(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    require_file(dir + "/flows.csv", "scenario");
    const auto schema = effective_schema(cfg);
    const auto ds = ingest::load_flow_csv(dir + "/flows.csv", schema);
    const Split split = split_dataset(ds, cfg.test_tenths);
    if (split.train.rows.empty()) {
        throw DataError("preprocess: training split is empty");
    }

    auto train_fm = ingest::fit_normalize(ingest::encode_features(split.train));
    std::size_t unseen = 0;
    auto test_raw = ingest::encode_features_with_meta(
        split.test, train_fm.column_meta, &unseen);
    auto test_fm = ingest::apply_normalize(test_raw, train_fm.norm_params);
    if (unseen > 0) {
        std::cout << "warning: " << unseen
                  << " categorical cells held categories unseen in training\n";
    }

    io::save_matrix(train_fm.matrix, dir + "/features_train.mat");
    io::save_matrix(test_fm.matrix, dir + "/features_test.mat");
    io::save_lines(split.train.labels, dir + "/labels_train.txt");
    io::save_lines(split.test.labels, dir + "/labels_test.txt");
    write_json(meta_to_json(train_fm), dir + "/feature_meta.json");
    std::cout << "wrote " << dir << "/features_train.mat ("
              << train_fm.matrix.rows() << "x" << train_fm.matrix.cols()
              << ")\n"
              << "wrote " << dir << "/features_test.mat ("
              << test_fm.matrix.rows() << "x" << test_fm.matrix.cols() << ")\n";
    return 0;
}

int cmd_train_ae(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    require_file(dir + "/features_train.mat", "preprocess");
    const auto x = io::load_matrix(dir + "/features_train.mat");
    auto result = sae::train_ae(x, cfg.sparsity, cfg.ae);

    std::vector<ingest::EncodedColumn> meta;
    meta_from_json(read_json(dir + "/feature_meta.json"), meta,
                   result.model.norm_params);
    sae::save_model(result.model, dir + "/ae_model.txt");
    std::vector<std::pair<std::size_t, double>> log;
    for (const auto& e : result.log) log.emplace_back(e.epoch, e.loss);
    write_train_log(log, dir + "/ae_train_log.csv");
    std::cout << "wrote " << dir << "/ae_model.txt (loss "
              << io::fmt(result.log.front().loss) << " -> "
              << io::fmt(result.log.back().loss) << ")\n";
    return 0;
}

int cmd_encode(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    require_file(dir + "/ae_model.txt", "train-ae");
    const auto model = sae::load_model(dir + "/ae_model.txt");
    for (const char* part : {"train", "test"}) {
        const std::string src = dir + "/features_" + part + ".mat";
        require_file(src, "preprocess");
        const auto codes = sae::encode(model, io::load_matrix(src));
        io::save_matrix(codes, dir + "/codes_" + part + ".mat");
        std::cout << "wrote " << dir << "/codes_" << part << ".mat ("
                  << codes.rows() << "x" << codes.cols() << ")\n";
    }
    return 0;
}

int cmd_train_clf(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    require_file(dir + "/codes_train.mat", "encode");
    require_file(dir + "/labels_train.txt", "preprocess");
    const auto codes = io::load_matrix(dir + "/codes_train.mat");
    const auto labels = io::load_lines(dir + "/labels_train.txt");
    auto result = detect::train_classifier(codes, labels, cfg.clf);
    detect::save_model(result.clf, dir + "/clf_model.txt");
    std::vector<std::pair<std::size_t, double>> log;
    for (const auto& e : result.log) log.emplace_back(e.epoch, e.loss);
    write_train_log(log, dir + "/clf_train_log.csv");
    std::cout << "wrote " << dir << "/clf_model.txt (loss "
              << io::fmt(result.log.front().loss) << " -> "
              << io::fmt(result.log.back().loss) << ")\n";
    return 0;
}

// Score used for the binary intrusion-vs-normal view: 1 - P(normal).
std::vector<double> intrusion_scores(const detect::LinearClassifier& clf,
                                     const num::Matrix& probs) {
    std::size_t normal_idx = clf.class_labels.size();
    for (std::size_t i = 0; i < clf.class_labels.size(); ++i) {
        if (clf.class_labels[i] == "normal") normal_idx = i;
    }
    std::vector<double> scores(probs.rows(), 1.0);
    if (normal_idx == clf.class_labels.size()) return scores;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        scores[i] = 1.0 - probs(i, normal_idx);
    }
    return scores;
}

int cmd_detect(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    require_file(dir + "/ae_model.txt", "train-ae");
    require_file(dir + "/clf_model.txt", "train-clf");
    require_file(dir + "/features_test.mat", "preprocess");
    require_file(dir + "/labels_test.txt", "preprocess");
    const auto model = sae::load_model(dir + "/ae_model.txt");
    const auto clf = detect::load_model(dir + "/clf_model.txt");
    const auto features = io::load_matrix(dir + "/features_test.mat");
    const auto labels = io::load_lines(dir + "/labels_test.txt");
    if (features.rows() != labels.size()) {
        throw DataError("detect: feature/label row mismatch");
    }

    std::ofstream pred_out(dir + "/predictions.csv");
    if (!pred_out) throw DataError("cannot write predictions.csv");
    pred_out << "index,predicted,actual,score\n";
    if (features.rows() == 0) {
        std::cout << "warning: empty test split; metrics omitted\n";
        return 0;
    }

    const auto codes = sae::encode(model, features);
    const auto pred = detect::predict(clf, codes);
    const auto scores = intrusion_scores(clf, pred.probabilities);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        pred_out << i << "," << pred.labels[i] << "," << labels[i] << ","
                 << io::fmt(scores[i]) << "\n";
    }
    const auto report = detect::evaluate(pred.labels, labels, scores);
    write_json(detect::metrics_to_json(report), dir + "/metrics.json");
    detect::save_roc_csv(report, dir + "/roc.csv");
    std::cout << "accuracy " << io::fmt(report.accuracy);
    if (report.auc) std::cout << ", auc " << io::fmt(*report.auc);
    std::cout << "\nwrote " << dir << "/predictions.csv, metrics.json, roc.csv\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    require_file(dir + "/predictions.csv", "detect");
    const auto lines = io::load_lines(dir + "/predictions.csv");
    if (lines.empty() || lines.front() != "index,predicted,actual,score") {
        throw DataError("predictions.csv: unexpected header");
    }
    std::vector<std::string> pred, actual;
    std::vector<double> scores;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream row(lines[i]);
        std::string idx, p, a, s;
        if (!std::getline(row, idx, ',') || !std::getline(row, p, ',') ||
            !std::getline(row, a, ',') || !std::getline(row, s)) {
            throw DataError("predictions.csv:" + std::to_string(i + 1) +
                            ": malformed row");
        }
        pred.push_back(p);
        actual.push_back(a);
        scores.push_back(std::stod(s));
    }
    if (pred.empty()) {
        std::cout << "warning: no predictions; metrics omitted\n";
        return 0;
    }
    const auto report = detect::evaluate(pred, actual, scores);
    write_json(detect::metrics_to_json(report), dir + "/metrics.json");
    detect::save_roc_csv(report, dir + "/roc.csv");
    std::cout << "accuracy " << io::fmt(report.accuracy);
    if (report.auc) std::cout << ", auc " << io::fmt(*report.auc);
    std::cout << "\n";
    return 0;
}

igraph::IntrusionGraph load_graph_inputs(const RunConfig& cfg,
                                         const std::string& dir) {
    require_file(dir + "/alerts.jsonl", "scenario");
    require_file(dir + "/topology.cfg", "scenario");
    const auto alerts = ingest::load_alerts(dir + "/alerts.jsonl");
    const auto topo = igraph::load_topology(dir + "/topology.cfg");
    return igraph::build_attribute_graph(alerts, topo,
                                         cfg.graph_window_seconds);
}

int cmd_train_gae(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    const auto g = load_graph_inputs(cfg, dir);
    const auto data = igraph::graph_to_gae_input(g);
    auto result = gae::train_gae(data, cfg.gae);
    gae::save_model(result.model, dir + "/gae_model.txt");
    std::vector<std::pair<std::size_t, double>> log;
    for (const auto& e : result.log) log.emplace_back(e.epoch, e.loss);
    write_train_log(log, dir + "/gae_train_log.csv");
    std::cout << "wrote " << dir << "/gae_model.txt (loss "
              << io::fmt(result.log.front().loss) << " -> "
              << io::fmt(result.log.back().loss) << ")\n";
    return 0;
}

int cmd_graph(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    const auto g = load_graph_inputs(cfg, dir);
    write_json(igraph::graph_to_json(g), dir + "/graph.json");
    igraph::save_edge_list(g, dir + "/graph_edges.txt");

    const auto chain =
        igraph::extract_evidence_chain(g, cfg.graph_target_host);
    write_json(igraph::chain_to_json(chain), dir + "/chain.json");
    const auto sub = igraph::chain_subgraph(g, chain);
    write_json(igraph::graph_to_json(sub), dir + "/chain_subgraph.json");
    const auto reduction = igraph::reduction_report(g, sub);
    write_json(igraph::reduction_to_json(reduction), dir + "/reduction.json");

    std::cout << "evidence chain to " << cfg.graph_target_host << ":\n";
    for (const auto& cs : chain.stages) {
        std::cout << "  " << ingest::format_timestamp(cs.info.first_ts) << " "
                  << cs.stage_id << " [" << cs.label << "] " << cs.info.src_host
                  << " -> " << cs.info.dst_host << "\n";
    }
    std::cout << "graph " << g.nodes.size() << " nodes / " << g.edges.size()
              << " edges; chain subgraph " << sub.nodes.size() << " / "
              << sub.edges.size() << "\n";

    if (cfg.gae_in_graph_cmd) {
        const auto data = igraph::graph_to_gae_input(g);
        auto result = gae::train_gae(data, cfg.gae);
        gae::save_model(result.model, dir + "/gae_model.txt");
        std::ofstream scores(dir + "/node_scores.csv");
        if (!scores) throw DataError("cannot write node_scores.csv");
        scores << "node,anomaly_score\n";
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            scores << g.nodes[i].id << ","
                   << io::fmt(gae::node_anomaly_score(result.model, data, i))
                   << "\n";
        }
        std::cout << "wrote " << dir << "/node_scores.csv\n";
    }
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const std::string dir = ensure_run_dir(cfg);
    require_file(dir + "/metrics.json", "detect");
    require_file(dir + "/reduction.json", "graph");
    nlohmann::json summary;
    summary["metrics"] = read_json(dir + "/metrics.json");
    summary["reduction"] = read_json(dir + "/reduction.json");
    write_json(summary, dir + "/summary.json");
    std::cout << "wrote " << dir << "/summary.json\n";
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"APT threat-detection toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "runs";
    std::uint64_t seed = 0;
    bool seed_given = false;

    // Flag state shared by the subcommands; flags override config values.
    bool calibrated_flag = false;
    double noise_rate = -1.0;
    std::int64_t background = -1;
    std::string target_host;
    double window_s = -1.0;

    // Every subcommand takes the full override set: the run directory is
    // named by the effective configuration hash, so a pipeline only lines up
    // when each step is invoked with the same configuration.
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file");
        sub->add_option("--out", out_dir, "output base directory");
        sub->add_option("--seed", seed, "seed override")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_flag("--calibrated", calibrated_flag,
                      "emit the calibrated 12-node/26-edge alert pattern");
        sub->add_option("--noise-rate", noise_rate,
                        "noise alerts per campaign alert");
        sub->add_option("--background", background, "background flow count");
        sub->add_option("--target", target_host, "evidence chain target host");
        sub->add_option("--window", window_s,
                        "alert clustering window (seconds)");
    };

    CLI::App* sc = app.add_subcommand("scenario",
                                      "generate the synthetic campaign");
    CLI::App* pp = app.add_subcommand("preprocess",
                                      "encode and normalize the flow dataset");
    CLI::App* ta = app.add_subcommand("train-ae", "train the sparse autoencoder");
    CLI::App* en = app.add_subcommand("encode", "emit latent codes");
    CLI::App* tc = app.add_subcommand("train-clf", "train the classifier");
    CLI::App* de = app.add_subcommand("detect", "classify the held-out flows");
    CLI::App* tg = app.add_subcommand("train-gae", "train the graph autoencoder");
    CLI::App* gr = app.add_subcommand("graph",
                                      "build the intrusion graph and chain");
    CLI::App* ev = app.add_subcommand("eval", "recompute metrics from predictions");
    CLI::App* re = app.add_subcommand("report", "merge metrics and reduction");
    for (CLI::App* sub : {sc, pp, ta, en, tc, de, tg, gr, ev, re}) {
        add_common(sub);
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg = load_run_config(config_path);
        cfg.out_dir = out_dir;
        if (seed_given) cfg.seed = seed;
        if (calibrated_flag) cfg.scenario.calibrated = true;
        if (noise_rate >= 0.0) cfg.scenario.noise_alert_rate = noise_rate;
        if (background >= 0) {
            cfg.scenario.n_background_flows =
                static_cast<std::size_t>(background);
        }
        if (!target_host.empty()) cfg.graph_target_host = target_host;
        if (window_s >= 0.0) cfg.graph_window_seconds = window_s;
        cfg.finalize();

        if (sc->parsed()) return cmd_scenario(cfg);
        if (pp->parsed()) return cmd_preprocess(cfg);
        if (ta->parsed()) return cmd_train_ae(cfg);
        if (en->parsed()) return cmd_encode(cfg);
        if (tc->parsed()) return cmd_train_clf(cfg);
        if (de->parsed()) return cmd_detect(cfg);
        if (tg->parsed()) return cmd_train_gae(cfg);
        if (gr->parsed()) return cmd_graph(cfg);
        if (ev->parsed()) return cmd_eval(cfg);
        if (re->parsed()) return cmd_report(cfg);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace aptshield::cli
