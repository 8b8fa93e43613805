#include "aptshield/config.hpp"

#include <fstream>
#include <sstream>

#include "aptshield/errors.hpp"
#include "aptshield/serialize.hpp"

namespace aptshield::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad unsigned value for '" + key + "': '" +
                          value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': '" +
                          value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: bad boolean value for '" + key + "': '" + value +
                      "'");
}

}  // namespace

void RunConfig::finalize() {
    scenario.seed = seed;
    ae.seed = seed;
    clf.seed = seed + 1;
    gae.seed = seed + 2;

    try {
        scenario.validate();
        sparsity.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (ae.d_hidden < 1) throw ConfigError("config: ae.d_hidden must be >= 1");
    if (ae.epochs < 1) throw ConfigError("config: ae.epochs must be >= 1");
    if (ae.learning_rate <= 0.0) {
        throw ConfigError("config: ae.learning_rate must be > 0");
    }
    if (clf.epochs < 1) throw ConfigError("config: clf.epochs must be >= 1");
    if (clf.learning_rate <= 0.0) {
        throw ConfigError("config: clf.learning_rate must be > 0");
    }
    if (gae.hidden < 1 || gae.embed < 1) {
        throw ConfigError("config: gae layer widths must be >= 1");
    }
    if (gae.epochs < 1) throw ConfigError("config: gae.epochs must be >= 1");
    if (gae.learning_rate <= 0.0) {
        throw ConfigError("config: gae.learning_rate must be > 0");
    }
    if (graph_window_seconds < 0.0) {
        throw ConfigError("config: graph.window_seconds must be >= 0");
    }
    if (graph_target_host.empty()) {
        throw ConfigError("config: graph.target_host must not be empty");
    }
    if (test_tenths < 1 || test_tenths > 9) {
        throw ConfigError("config: split.test_tenths must be in [1,9]");
    }
}

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) {
        cfg.finalize();
        return cfg;
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));

        if (key == "seed") {
            cfg.seed = parse_u64(key, value);
        } else if (key == "scenario.n_background_flows") {
            cfg.scenario.n_background_flows = parse_u64(key, value);
        } else if (key == "scenario.n_hosts") {
            cfg.scenario.n_hosts = parse_u64(key, value);
        } else if (key == "scenario.stage_gap_seconds") {
            cfg.scenario.stage_gap_seconds = parse_double(key, value);
        } else if (key == "scenario.noise_alert_rate") {
            cfg.scenario.noise_alert_rate = parse_double(key, value);
        } else if (key == "scenario.calibrated") {
            cfg.scenario.calibrated = parse_bool(key, value);
        } else if (key == "scenario.table1_noise_mix") {
            cfg.scenario.table1_noise_mix = parse_bool(key, value);
        } else if (key == "ae.d_hidden") {
            cfg.ae.d_hidden = parse_u64(key, value);
        } else if (key == "ae.epochs") {
            cfg.ae.epochs = parse_u64(key, value);
        } else if (key == "ae.batch_size") {
            cfg.ae.batch_size = parse_u64(key, value);
        } else if (key == "ae.learning_rate") {
            cfg.ae.learning_rate = parse_double(key, value);
        } else if (key == "ae.R") {
            cfg.sparsity.R = parse_double(key, value);
        } else if (key == "ae.E") {
            cfg.sparsity.E = parse_double(key, value);
        } else if (key == "ae.threshold_mode") {
            try {
                cfg.sparsity.threshold_mode = sae::threshold_mode_from_name(value);
            } catch (const Error& e) {
                throw ConfigError(std::string("config: ") + e.what());
            }
        } else if (key == "ae.beta") {
            cfg.sparsity.beta = parse_double(key, value);
        } else if (key == "ae.clamp_eps") {
            cfg.sparsity.clamp_eps = parse_double(key, value);
        } else if (key == "clf.epochs") {
            cfg.clf.epochs = parse_u64(key, value);
        } else if (key == "clf.learning_rate") {
            cfg.clf.learning_rate = parse_double(key, value);
        } else if (key == "gae.hidden") {
            cfg.gae.hidden = parse_u64(key, value);
        } else if (key == "gae.embed") {
            cfg.gae.embed = parse_u64(key, value);
        } else if (key == "gae.epochs") {
            cfg.gae.epochs = parse_u64(key, value);
        } else if (key == "gae.learning_rate") {
            cfg.gae.learning_rate = parse_double(key, value);
        } else if (key == "gae.train") {
            cfg.gae_in_graph_cmd = parse_bool(key, value);
        } else if (key == "graph.window_seconds") {
            cfg.graph_window_seconds = parse_double(key, value);
        } else if (key == "graph.target_host") {
            cfg.graph_target_host = value;
        } else if (key == "split.test_tenths") {
            cfg.test_tenths = static_cast<int>(parse_u64(key, value));
        } else if (key == "preprocess.schema") {
            cfg.schema_path = value;
        } else {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": unknown config key '" + key + "'");
        }
    }
    cfg.finalize();
    return cfg;
}

std::string canonical_string(const RunConfig& cfg) {
    std::ostringstream out;
    out << "seed = " << cfg.seed << "\n";
    out << "scenario.n_background_flows = " << cfg.scenario.n_background_flows
        << "\n";
    out << "scenario.n_hosts = " << cfg.scenario.n_hosts << "\n";
    out << "scenario.stage_gap_seconds = "
        << io::fmt(cfg.scenario.stage_gap_seconds) << "\n";
    out << "scenario.noise_alert_rate = "
        << io::fmt(cfg.scenario.noise_alert_rate) << "\n";
    out << "scenario.calibrated = " << (cfg.scenario.calibrated ? "true" : "false")
        << "\n";
    out << "scenario.table1_noise_mix = "
        << (cfg.scenario.table1_noise_mix ? "true" : "false") << "\n";
    out << "ae.d_hidden = " << cfg.ae.d_hidden << "\n";
    out << "ae.epochs = " << cfg.ae.epochs << "\n";
    out << "ae.batch_size = " << cfg.ae.batch_size << "\n";
    out << "ae.learning_rate = " << io::fmt(cfg.ae.learning_rate) << "\n";
    out << "ae.R = " << io::fmt(cfg.sparsity.R) << "\n";
    out << "ae.E = " << io::fmt(cfg.sparsity.E) << "\n";
    out << "ae.threshold_mode = "
        << sae::threshold_mode_name(cfg.sparsity.threshold_mode) << "\n";
    out << "ae.beta = " << io::fmt(cfg.sparsity.beta) << "\n";
    out << "ae.clamp_eps = " << io::fmt(cfg.sparsity.clamp_eps) << "\n";
    out << "clf.epochs = " << cfg.clf.epochs << "\n";
    out << "clf.learning_rate = " << io::fmt(cfg.clf.learning_rate) << "\n";
    out << "gae.hidden = " << cfg.gae.hidden << "\n";
    out << "gae.embed = " << cfg.gae.embed << "\n";
    out << "gae.epochs = " << cfg.gae.epochs << "\n";
    out << "gae.learning_rate = " << io::fmt(cfg.gae.learning_rate) << "\n";
    out << "gae.train = " << (cfg.gae_in_graph_cmd ? "true" : "false") << "\n";
    out << "graph.window_seconds = " << io::fmt(cfg.graph_window_seconds)
        << "\n";
    out << "graph.target_host = " << cfg.graph_target_host << "\n";
    out << "split.test_tenths = " << cfg.test_tenths << "\n";
    out << "preprocess.schema = " << cfg.schema_path << "\n";
    return out.str();
}

std::string run_dir(const RunConfig& cfg) {
    const std::string canon = canonical_string(cfg);
    std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a 64
    for (unsigned char ch : canon) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "run-%016llx",
                  static_cast<unsigned long long>(hash));
    return cfg.out_dir + "/" + buf;
}

}  // namespace aptshield::cli
