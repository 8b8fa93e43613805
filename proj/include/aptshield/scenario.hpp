#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "aptshield/ingest.hpp"
#include "aptshield/intrusion_graph.hpp"

namespace aptshield::scenario {

struct ScenarioConfig {
    std::uint64_t seed = 7;
    std::size_t n_background_flows = 2000;
    std::size_t n_hosts = 6;  // attacker + the five-server roster, minimum
    double stage_gap_seconds = 300.0;
    double noise_alert_rate = 0.0;  // noise alerts per campaign alert
    // Emit the fixed two-alert noise pattern that calibrates the attribute
    // graph to 12 nodes / 26 edges (chain subgraph 10 / 19).
    bool calibrated = false;
    // Draw noise categories with probabilities proportional to the alarm
    // quantity column of the alert taxonomy instead of uniformly.
    bool table1_noise_mix = false;

    void validate() const;
};

struct StageTruth {
    std::string kind;  // scan|probe|exploit|implant|ddos
    std::string src;
    std::string dst;
    std::int64_t t_begin;
    std::int64_t t_end;
    std::vector<std::size_t> alert_ids;  // indices into the emitted alert list
};

struct GroundTruth {
    std::uint64_t seed = 0;
    std::array<StageTruth, 5> stages;
    std::vector<std::string> flow_labels;  // "normal" or the stage kind
};

struct ScenarioOutput {
    ingest::FlowDataset flows;
    std::vector<ingest::Alert> alerts;  // time-sorted
    igraph::Topology topology;
    GroundTruth truth;
};

// The schema of generated flow datasets.
ingest::FlowSchema flow_schema();

// Deterministic five-stage campaign (scan, probe, exploit, implant, ddos)
// over the fixed host roster, with background flows and optional noise
// alerts interleaved.
ScenarioOutput generate(const ScenarioConfig& cfg);

// Re-derives the per-flow labels; the dataset must be the one generated
// with this ground truth.
std::vector<std::string> label_flows(const GroundTruth& gt,
                                     const ingest::FlowDataset& ds);

nlohmann::json ground_truth_to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const nlohmann::json& j);

// flows.csv, alerts.jsonl, topology.cfg and ground_truth.json under dir.
void write_outputs(const ScenarioOutput& out, const std::string& dir);

}  // namespace aptshield::scenario
