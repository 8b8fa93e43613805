#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "aptshield/detect.hpp"
#include "aptshield/gae.hpp"
#include "aptshield/scenario.hpp"
#include "aptshield/sparse_ae.hpp"

namespace aptshield::cli {

// One self-describing configuration per run; command-line flags override
// file values. Unknown keys and out-of-range values are rejected at load.
struct RunConfig {
    std::uint64_t seed = 7;

    scenario::ScenarioConfig scenario;
    sae::SparsityConfig sparsity;
    sae::AeHyper ae;
    detect::ClfHyper clf;
    gae::GaeHyper gae;
    bool gae_in_graph_cmd = false;

    double graph_window_seconds = 60.0;
    std::string graph_target_host = "mill";

    // Row i is held out when (i mod 10) >= 10 - test_tenths.
    int test_tenths = 3;

    // Empty: use the generated scenario's built-in flow schema.
    std::string schema_path;

    std::string out_dir = "runs";

    // Re-derives the per-module seeds and re-checks every range.
    void finalize();
};

// Defaults when path is empty.
RunConfig load_run_config(const std::string& path);

// Fixed-order "key = value" rendering of every setting (out_dir excluded);
// this is what the run directory hash covers.
std::string canonical_string(const RunConfig& cfg);

// <out_dir>/run-<fnv1a64 of canonical_string>.
std::string run_dir(const RunConfig& cfg);

}  // namespace aptshield::cli
