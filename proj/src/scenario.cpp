#include "aptshield/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "aptshield/errors.hpp"
#include "aptshield/rng.hpp"
#include "aptshield/serialize.hpp"

namespace aptshield::scenario {

namespace {

// 2000-04-07T08:00:00Z, the opening of the replay window.
constexpr std::int64_t kBaseTime = 955094400;

constexpr const char* kStageKinds[5] = {"scan", "probe", "exploit", "implant",
                                        "ddos"};

// Campaign categories; all other taxonomy entries are noise-only.
constexpr const char* kCampaignCatLow = "Attempted Information Leak";      // sev 2
constexpr const char* kCampaignCatHigh = "Attempted Administrator Privilege Gain";  // sev 1

struct NoiseCategory {
    const char* name;
    int severity;
    double table1_quantity;
};

constexpr NoiseCategory kNoiseCategories[6] = {
    {"Misc activity", 3, 672.0},
    {"Potentially Bad Traffic", 2, 5.0},
    {"Misc Intrusion", 2, 55.0},
    {"Not Suspicious Traffic", 3, 15.0},
    {"Access to potentially vulnerable app", 2, 18.0},
    {"Decode of an RPC Query", 2, 92.0},
};

struct StagePlan {
    const char* kind;
    const char* category;
    int severity;
    const char* src;
    const char* dst;
    std::size_t alert_count;
};

// Hop chain: the attacker footprints the DMZ web server, works on it
// locally, pivots the implant onto the DNS server and triggers the flood
// from there. Calibrated so the attribute graph lands on the reported
// reduction figures.
constexpr StagePlan kStages[5] = {
    {"scan", kCampaignCatLow, 2, "attacker", "loche", 5},
    {"probe", kCampaignCatLow, 2, "loche", "loche", 4},
    {"exploit", kCampaignCatLow, 2, "loche", "loche", 3},
    {"implant", kCampaignCatHigh, 1, "loche", "mill", 3},
    {"ddos", kCampaignCatHigh, 1, "mill", "mill", 6},
};

ingest::Alert make_alert(std::int64_t ts, const std::string& category,
                         int severity, const std::string& src,
                         const std::string& dst,
                         std::optional<std::string> hint) {
    ingest::Alert a;
    a.epoch_s = ts;
    a.timestamp = ingest::format_timestamp(ts);
    a.category = category;
    a.severity = severity;
    a.src_host = src;
    a.dst_host = dst;
    a.stage_hint = std::move(hint);
    return a;
}

double log_uniform(num::Rng& rng, double lo, double hi) {
    return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

struct FlowDraft {
    double sort_key;
    std::vector<std::string> cells;  // duration,bytes,rate,protocol,service,flag,label
    std::string label;
};

// Rng draws happen in sequenced statements (never inside argument lists),
// keeping the stream order identical across compilers.
FlowDraft make_flow(num::Rng& rng, double duration, double bytes,
                    const std::string& protocol, const std::string& service,
                    const std::string& flag, const std::string& label) {
    const double rate = bytes / std::max(duration, 1e-3);
    FlowDraft f;
    f.sort_key = rng.next_unit();
    f.cells = {io::fmt(duration), io::fmt(bytes), io::fmt(rate),
               protocol,          service,        flag,
               label};
    f.label = label;
    return f;
}

FlowDraft background_flow(num::Rng& rng) {
    const double u = rng.next_unit();
    std::string protocol, service, flag;
    if (u < 0.7) {
        protocol = "tcp";
        const double s = rng.next_unit();
        service = s < 0.45 ? "http" : s < 0.70 ? "smtp" : s < 0.90 ? "ftp" : "dns";
        const double fl = rng.next_unit();
        flag = fl < 0.90 ? "SF" : fl < 0.95 ? "REJ" : "RSTO";
    } else if (u < 0.9) {
        protocol = "udp";
        service = rng.next_unit() < 0.8 ? "dns" : "ntp";
        flag = "SF";
    } else {
        protocol = "icmp";
        service = rng.next_unit() < 0.7 ? "ecr_i" : "urp_i";
        flag = "SF";
    }
    const double duration = log_uniform(rng, 0.1, 30.0);
    const double bytes = log_uniform(rng, 200.0, 50000.0);
    return make_flow(rng, duration, bytes, protocol, service, flag, "normal");
}

FlowDraft stage_flow(num::Rng& rng, const std::string& kind) {
    if (kind == "scan") {
        const double duration = log_uniform(rng, 0.001, 0.005);
        const double bytes = log_uniform(rng, 50.0, 150.0);
        return make_flow(rng, duration, bytes, "icmp", "eco_i", "SF", kind);
    }
    if (kind == "probe") {
        const double duration = log_uniform(rng, 0.001, 0.02);
        const double bytes = log_uniform(rng, 60.0, 300.0);
        const std::string flag = rng.next_unit() < 0.5 ? "REJ" : "S0";
        return make_flow(rng, duration, bytes, "tcp", "private", flag, kind);
    }
    if (kind == "exploit") {
        const double duration = log_uniform(rng, 0.05, 2.0);
        const double bytes = log_uniform(rng, 1500.0, 12000.0);
        return make_flow(rng, duration, bytes, "tcp", "sunrpc", "SF", kind);
    }
    if (kind == "implant") {
        const double duration = log_uniform(rng, 1.0, 15.0);
        const double bytes = log_uniform(rng, 60000.0, 600000.0);
        return make_flow(rng, duration, bytes, "tcp", "shell", "SF", kind);
    }
    // ddos
    const double duration = log_uniform(rng, 0.0005, 0.01);
    const double bytes = log_uniform(rng, 40.0, 200.0);
    return make_flow(rng, duration, bytes, "udp", "private", "SF", kind);
}

}  // namespace

void ScenarioConfig::validate() const {
    if (n_hosts < 6) {
        throw ConfigError("scenario: n_hosts must be >= 6 (attacker plus the "
                          "five-server roster)");
    }
    if (noise_alert_rate < 0.0) {
        throw ConfigError("scenario: noise_alert_rate must be >= 0");
    }
    if (stage_gap_seconds < 120.0) {
        throw ConfigError("scenario: stage_gap_seconds must be >= 120 so "
                          "consecutive clusters stay separated");
    }
}

ingest::FlowSchema flow_schema() {
    using ingest::ColumnKind;
    ingest::FlowSchema schema;
    schema.columns = {
        {"duration", ColumnKind::Numeric},  {"bytes", ColumnKind::Numeric},
        {"rate", ColumnKind::Numeric},      {"protocol", ColumnKind::Categorical},
        {"service", ColumnKind::Categorical}, {"flag", ColumnKind::Categorical},
        {"label", ColumnKind::Label},
    };
    return schema;
}

ScenarioOutput generate(const ScenarioConfig& cfg) {
    cfg.validate();
    num::Rng rng(cfg.seed);

    ScenarioOutput out;

    // Host roster mirrors the replay topology: DMZ web server plus the
    // intranet file/mail/dns servers behind the firewall.
    out.topology.hosts = {
        {"attacker", igraph::Zone::External, {}},
        {"loche", igraph::Zone::Dmz, {"www"}},
        {"mail", igraph::Zone::Intranet, {"smtp"}},
        {"zero", igraph::Zone::Intranet, {"nfs"}},
        {"pascal", igraph::Zone::Intranet, {"nfs"}},
        {"mill", igraph::Zone::Intranet, {"dns"}},
    };
    for (std::size_t i = 6; i < cfg.n_hosts; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "ws%02zu", i - 5);
        out.topology.hosts.push_back({buf, igraph::Zone::Intranet, {}});
    }
    out.topology.reachability.emplace_back("attacker", "loche");
    for (std::size_t i = 2; i < out.topology.hosts.size(); ++i) {
        out.topology.reachability.emplace_back("loche",
                                               out.topology.hosts[i].name);
    }
    out.topology.validate();

    // Campaign alerts: five temporally disjoint clusters.
    struct Tagged {
        ingest::Alert alert;
        int stage;  // -1 for noise
        std::size_t order;
    };
    std::vector<Tagged> tagged;
    const auto gap = static_cast<std::int64_t>(cfg.stage_gap_seconds);
    std::int64_t campaign_end = kBaseTime;
    out.truth.seed = cfg.seed;
    for (int s = 0; s < 5; ++s) {
        const StagePlan& plan = kStages[s];
        std::int64_t t = kBaseTime + (s + 1) * gap;
        StageTruth& st = out.truth.stages[s];
        st.kind = plan.kind;
        st.src = plan.src;
        st.dst = plan.dst;
        st.t_begin = t;
        for (std::size_t i = 0; i < plan.alert_count; ++i) {
            tagged.push_back({make_alert(t, plan.category, plan.severity,
                                         plan.src, plan.dst, plan.kind),
                              s, tagged.size()});
            if (i + 1 < plan.alert_count) {
                t += 1 + static_cast<std::int64_t>(rng.next_below(8));
            }
        }
        st.t_end = t;
        campaign_end = std::max(campaign_end, t);
    }
    const std::size_t campaign_alerts = tagged.size();

    if (cfg.calibrated) {
        // Two dangling clusters tuned so the attribute graph gains exactly
        // two nodes and seven directed edges over the campaign closure.
        tagged.push_back({make_alert(campaign_end + 400, kCampaignCatHigh, 1,
                                     "attacker", "mill", std::nullopt),
                          -1, tagged.size()});
        tagged.push_back({make_alert(campaign_end + 800, kCampaignCatLow, 2,
                                     "mill", "loche", std::nullopt),
                          -1, tagged.size()});
    } else if (cfg.noise_alert_rate > 0.0) {
        // Self-directed noise: it can insert extra hops into a campaign
        // path but never displace a ground-truth stage from it.
        const auto count = static_cast<std::size_t>(
            std::floor(cfg.noise_alert_rate *
                           static_cast<double>(campaign_alerts) +
                       0.5));
        double weight_total = 0.0;
        for (const auto& nc : kNoiseCategories) {
            weight_total += cfg.table1_noise_mix ? nc.table1_quantity : 1.0;
        }
        for (std::size_t i = 0; i < count; ++i) {
            double pick = rng.next_unit() * weight_total;
            const NoiseCategory* chosen = &kNoiseCategories[0];
            for (const auto& nc : kNoiseCategories) {
                const double w = cfg.table1_noise_mix ? nc.table1_quantity : 1.0;
                if (pick < w) {
                    chosen = &nc;
                    break;
                }
                pick -= w;
            }
            const auto& host =
                out.topology.hosts[rng.next_below(out.topology.hosts.size())];
            const std::int64_t ts =
                kBaseTime +
                static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(
                    campaign_end + gap - kBaseTime)));
            tagged.push_back({make_alert(ts, chosen->name, chosen->severity,
                                         host.name, host.name, std::nullopt),
                              -1, tagged.size()});
        }
    }

    std::stable_sort(tagged.begin(), tagged.end(),
                     [](const Tagged& a, const Tagged& b) {
                         return a.alert.epoch_s < b.alert.epoch_s;
                     });
    for (std::size_t i = 0; i < tagged.size(); ++i) {
        out.alerts.push_back(tagged[i].alert);
        if (tagged[i].stage >= 0) {
            out.truth.stages[tagged[i].stage].alert_ids.push_back(i);
        }
    }

    // Flows: background plus per-stage traffic, deterministically shuffled.
    const std::size_t per_stage =
        std::max<std::size_t>(50, cfg.n_background_flows / 10);
    std::vector<FlowDraft> drafts;
    drafts.reserve(cfg.n_background_flows + 5 * per_stage);
    for (std::size_t i = 0; i < cfg.n_background_flows; ++i) {
        drafts.push_back(background_flow(rng));
    }
    for (const char* kind : kStageKinds) {
        for (std::size_t i = 0; i < per_stage; ++i) {
            drafts.push_back(stage_flow(rng, kind));
        }
    }
    std::stable_sort(drafts.begin(), drafts.end(),
                     [](const FlowDraft& a, const FlowDraft& b) {
                         return a.sort_key < b.sort_key;
                     });

    out.flows.schema = flow_schema();
    for (auto& d : drafts) {
        out.flows.rows.push_back(std::move(d.cells));
        out.flows.labels.push_back(d.label);
        out.truth.flow_labels.push_back(std::move(d.label));
    }
    return out;
}

std::vector<std::string> label_flows(const GroundTruth& gt,
                                     const ingest::FlowDataset& ds) {
    if (gt.flow_labels.size() != ds.rows.size()) {
        throw DomainError("label_flows: ground truth covers " +
                          std::to_string(gt.flow_labels.size()) +
                          " flows, dataset has " +
                          std::to_string(ds.rows.size()));
    }
    if (gt.flow_labels != ds.labels) {
        throw DomainError("label_flows: dataset labels do not match this "
                          "ground truth; mismatched provenance");
    }
    return gt.flow_labels;
}

nlohmann::json ground_truth_to_json(const GroundTruth& gt) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& st : gt.stages) {
        stages.push_back({{"kind", st.kind},
                          {"src", st.src},
                          {"dst", st.dst},
                          {"t_begin", ingest::format_timestamp(st.t_begin)},
                          {"t_end", ingest::format_timestamp(st.t_end)},
                          {"alert_ids", st.alert_ids}});
    }
    return {{"seed", gt.seed},
            {"stages", stages},
            {"flow_labels", gt.flow_labels}};
}

GroundTruth ground_truth_from_json(const nlohmann::json& j) {
    GroundTruth gt;
    gt.seed = j.at("seed").get<std::uint64_t>();
    const auto& stages = j.at("stages");
    if (stages.size() != 5) {
        throw DataError("ground truth must have exactly 5 stages");
    }
    for (std::size_t i = 0; i < 5; ++i) {
        StageTruth& st = gt.stages[i];
        st.kind = stages[i].at("kind").get<std::string>();
        st.src = stages[i].at("src").get<std::string>();
        st.dst = stages[i].at("dst").get<std::string>();
        st.t_begin = ingest::parse_timestamp(stages[i].at("t_begin"));
        st.t_end = ingest::parse_timestamp(stages[i].at("t_end"));
        st.alert_ids = stages[i].at("alert_ids").get<std::vector<std::size_t>>();
    }
    gt.flow_labels = j.at("flow_labels").get<std::vector<std::string>>();
    return gt;
}

void write_outputs(const ScenarioOutput& out, const std::string& dir) {
    ingest::write_flow_csv(out.flows, dir + "/flows.csv");
    ingest::write_alerts(out.alerts, dir + "/alerts.jsonl");
    igraph::save_topology(out.topology, dir + "/topology.cfg");
    std::ofstream gt(dir + "/ground_truth.json");
    if (!gt) throw DataError("cannot write " + dir + "/ground_truth.json");
    gt << ground_truth_to_json(out.truth).dump(2) << "\n";
}

}  // namespace aptshield::scenario
