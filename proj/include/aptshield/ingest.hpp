#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aptshield/matrix.hpp"

namespace aptshield::ingest {

enum class ColumnKind { Numeric, Categorical, Label };

struct Column {
    std::string name;
    ColumnKind kind;
};

// Ordered column descriptors; exactly one label column, names unique.
struct FlowSchema {
    std::vector<Column> columns;

    std::size_t label_index() const;
    std::size_t feature_count() const { return columns.size() - 1; }
    void validate() const;
};

// Schema file: one "name = numeric|categorical|label" line per column,
// in column order. '#' starts a comment.
FlowSchema load_schema(const std::string& path);
void save_schema(const FlowSchema& schema, const std::string& path);

struct FlowDataset {
    FlowSchema schema;
    // One value per schema column, raw text for categorical/label columns.
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> labels;
};

FlowDataset load_flow_csv(const std::string& path, const FlowSchema& schema);
void write_flow_csv(const FlowDataset& ds, const std::string& path);

// Provenance of one encoded column: the source column plus, for one-hot
// columns, the category value it indicates.
struct EncodedColumn {
    std::string source;
    std::string category;  // empty for numeric pass-through columns
};

struct FeatureMatrix {
    num::Matrix matrix;
    std::vector<EncodedColumn> column_meta;
    // Per-column (min, max) recorded by fit_normalize; empty before fitting.
    std::vector<std::pair<double, double>> norm_params;
};

// One-hot expansion of categorical columns (categories sorted per column),
// numeric pass-through. The label column is excluded. Empty dataset -> DataError.
FeatureMatrix encode_features(const FlowDataset& ds);

// Apply-time encoding against a previously fitted column layout. Categories
// unseen at fit time leave their one-hot group all zeros; the count of such
// cells is reported through unseen_count when given.
FeatureMatrix encode_features_with_meta(const FlowDataset& ds,
                                        const std::vector<EncodedColumn>& meta,
                                        std::size_t* unseen_count = nullptr);

// Min-max normalization into [0,1]; constant columns map to 0. Records the
// per-column (min, max) in norm_params.
FeatureMatrix fit_normalize(const FeatureMatrix& fm);

// Applies previously fitted params; output clamped to [0,1].
FeatureMatrix apply_normalize(const FeatureMatrix& fm,
                              const std::vector<std::pair<double, double>>& params);

struct Alert {
    std::string timestamp;   // ISO-8601 instant, e.g. 2000-04-07T10:15:00Z
    std::int64_t epoch_s;    // parsed from timestamp
    std::string category;
    int severity;            // 1..3, 1 most severe
    std::string src_host;
    std::string dst_host;
    std::optional<std::string> stage_hint;
};

// Parses "YYYY-MM-DDTHH:MM:SSZ" to seconds since the epoch (UTC).
std::int64_t parse_timestamp(const std::string& iso);
std::string format_timestamp(std::int64_t epoch_s);

// JSON-lines, one alert per line; returned sorted ascending by timestamp
// (stable for equal timestamps).
std::vector<Alert> load_alerts(const std::string& path);
void write_alerts(const std::vector<Alert>& alerts, const std::string& path);

}  // namespace aptshield::ingest
