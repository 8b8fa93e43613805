#include "aptshield/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aptshield/errors.hpp"

namespace aptshield::ingest {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

}  // namespace

std::size_t FlowSchema::label_index() const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].kind == ColumnKind::Label) return i;
    }
    throw DataError("schema has no label column");
}

void FlowSchema::validate() const {
    std::set<std::string> names;
    std::size_t labels = 0;
    for (const auto& c : columns) {
        if (!names.insert(c.name).second) {
            throw DataError("schema: duplicate column name '" + c.name + "'");
        }
        if (c.kind == ColumnKind::Label) ++labels;
    }
    if (labels != 1) {
        throw DataError("schema: expected exactly one label column, found " +
                        std::to_string(labels));
    }
}

FlowSchema load_schema(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    FlowSchema schema;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected 'name = kind'");
        }
        const std::string name = trim(t.substr(0, eq));
        const std::string kind = trim(t.substr(eq + 1));
        ColumnKind k;
        if (kind == "numeric") {
            k = ColumnKind::Numeric;
        } else if (kind == "categorical") {
            k = ColumnKind::Categorical;
        } else if (kind == "label") {
            k = ColumnKind::Label;
        } else {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": unknown column kind '" + kind + "'");
        }
        schema.columns.push_back({name, k});
    }
    schema.validate();
    return schema;
}

void save_schema(const FlowSchema& schema, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (const auto& c : schema.columns) {
        const char* kind = c.kind == ColumnKind::Numeric      ? "numeric"
                           : c.kind == ColumnKind::Categorical ? "categorical"
                                                               : "label";
        out << c.name << " = " << kind << "\n";
    }
}

FlowDataset load_flow_csv(const std::string& path, const FlowSchema& schema) {
    schema.validate();
    std::ifstream in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": missing header row");
    const auto header = split_csv_line(line);
    if (header.size() != schema.columns.size()) {
        throw DataError(path + ": header has " + std::to_string(header.size()) +
                        " columns, schema declares " +
                        std::to_string(schema.columns.size()));
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] != schema.columns[i].name) {
            throw DataError(path + ": header column " + std::to_string(i + 1) +
                            " is '" + header[i] + "', schema declares '" +
                            schema.columns[i].name + "'");
        }
    }

    FlowDataset ds;
    ds.schema = schema;
    const std::size_t label_idx = schema.label_index();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != schema.columns.size()) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(schema.columns.size()) +
                            " cells, found " + std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (schema.columns[c].kind == ColumnKind::Numeric) {
                try {
                    std::size_t pos = 0;
                    (void)std::stod(cells[c], &pos);
                    if (pos != cells[c].size()) throw std::invalid_argument("");
                } catch (const std::exception&) {
                    throw DataError(path + ":" + std::to_string(lineno) +
                                    ": column '" + schema.columns[c].name +
                                    "': cannot parse numeric value '" + cells[c] +
                                    "'");
                }
            }
        }
        ds.labels.push_back(cells[label_idx]);
        ds.rows.push_back(std::move(cells));
    }
    return ds;
}

void write_flow_csv(const FlowDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::size_t i = 0; i < ds.schema.columns.size(); ++i) {
        out << (i ? "," : "") << ds.schema.columns[i].name;
    }
    out << "\n";
    for (const auto& row : ds.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << "\n";
    }
}

FeatureMatrix encode_features(const FlowDataset& ds) {
    if (ds.rows.empty()) throw DataError("encode_features: empty dataset");
    ds.schema.validate();

    // Category vocabulary per categorical column, sorted for determinism.
    std::map<std::size_t, std::vector<std::string>> vocab;
    for (std::size_t c = 0; c < ds.schema.columns.size(); ++c) {
        if (ds.schema.columns[c].kind != ColumnKind::Categorical) continue;
        std::set<std::string> seen;
        for (const auto& row : ds.rows) seen.insert(row[c]);
        vocab[c] = {seen.begin(), seen.end()};
    }

    FeatureMatrix fm;
    for (std::size_t c = 0; c < ds.schema.columns.size(); ++c) {
        const auto& col = ds.schema.columns[c];
        if (col.kind == ColumnKind::Numeric) {
            fm.column_meta.push_back({col.name, ""});
        } else if (col.kind == ColumnKind::Categorical) {
            for (const auto& cat : vocab[c]) {
                fm.column_meta.push_back({col.name, cat});
            }
        }
    }

    const std::size_t width = fm.column_meta.size();
    fm.matrix = num::Matrix(ds.rows.size(), width);
    for (std::size_t r = 0; r < ds.rows.size(); ++r) {
        std::size_t j = 0;
        for (std::size_t c = 0; c < ds.schema.columns.size(); ++c) {
            const auto& col = ds.schema.columns[c];
            if (col.kind == ColumnKind::Numeric) {
                fm.matrix(r, j++) = std::stod(ds.rows[r][c]);
            } else if (col.kind == ColumnKind::Categorical) {
                const auto& cats = vocab[c];
                for (const auto& cat : cats) {
                    fm.matrix(r, j++) = (ds.rows[r][c] == cat) ? 1.0 : 0.0;
                }
            }
        }
    }
    fm.matrix.require_finite("encoded features");
    return fm;
}

FeatureMatrix encode_features_with_meta(const FlowDataset& ds,
                                        const std::vector<EncodedColumn>& meta,
                                        std::size_t* unseen_count) {
    ds.schema.validate();
    std::map<std::string, std::size_t> col_by_name;
    for (std::size_t c = 0; c < ds.schema.columns.size(); ++c) {
        col_by_name[ds.schema.columns[c].name] = c;
    }
    for (const auto& mc : meta) {
        if (!col_by_name.count(mc.source)) {
            throw DataError("encode_features_with_meta: dataset lacks column '" +
                            mc.source + "'");
        }
    }
    if (unseen_count != nullptr) *unseen_count = 0;
    FeatureMatrix fm;
    fm.column_meta = meta;
    fm.matrix = num::Matrix(ds.rows.size(), meta.size());
    for (std::size_t r = 0; r < ds.rows.size(); ++r) {
        std::set<std::string> matched;  // categorical sources with a hit
        for (std::size_t j = 0; j < meta.size(); ++j) {
            const auto& cell = ds.rows[r][col_by_name.at(meta[j].source)];
            if (meta[j].category.empty()) {
                fm.matrix(r, j) = std::stod(cell);
            } else if (cell == meta[j].category) {
                fm.matrix(r, j) = 1.0;
                matched.insert(meta[j].source);
            }
        }
        if (unseen_count != nullptr) {
            for (const auto& mc : meta) {
                if (!mc.category.empty() && !matched.count(mc.source)) {
                    ++*unseen_count;
                    matched.insert(mc.source);  // count each cell once
                }
            }
        }
    }
    fm.matrix.require_finite("encoded features");
    return fm;
}

FeatureMatrix fit_normalize(const FeatureMatrix& fm) {
    FeatureMatrix out = fm;
    out.norm_params.clear();
    const auto& m = fm.matrix;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double lo = m(0, c), hi = m(0, c);
        for (std::size_t r = 1; r < m.rows(); ++r) {
            lo = std::min(lo, m(r, c));
            hi = std::max(hi, m(r, c));
        }
        out.norm_params.emplace_back(lo, hi);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            out.matrix(r, c) = (hi > lo) ? (m(r, c) - lo) / (hi - lo) : 0.0;
        }
    }
    return out;
}

FeatureMatrix apply_normalize(const FeatureMatrix& fm,
                              const std::vector<std::pair<double, double>>& params) {
    if (params.size() != fm.matrix.cols()) {
        throw ShapeError("apply_normalize: " + std::to_string(params.size()) +
                         " params vs " + std::to_string(fm.matrix.cols()) +
                         " columns");
    }
    FeatureMatrix out = fm;
    out.norm_params = params;
    for (std::size_t c = 0; c < fm.matrix.cols(); ++c) {
        const auto [lo, hi] = params[c];
        for (std::size_t r = 0; r < fm.matrix.rows(); ++r) {
            double v = (hi > lo) ? (fm.matrix(r, c) - lo) / (hi - lo) : 0.0;
            out.matrix(r, c) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

std::int64_t parse_timestamp(const std::string& iso) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char tail = 0;
    if (std::sscanf(iso.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h,
                    &mi, &s, &tail) != 7 ||
        tail != 'Z') {
        throw DataError("bad timestamp '" + iso +
                        "' (expected YYYY-MM-DDTHH:MM:SSZ)");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
        throw DataError("bad timestamp '" + iso + "': field out of range");
    }
    // Days since 1970-01-01 (civil-from-days, Hinnant's algorithm).
    const int yy = y - (mo <= 2);
    const int era = (yy >= 0 ? yy : yy - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(yy - era * 400);
    const unsigned doy = (153u * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const std::int64_t days = era * 146097LL + static_cast<int>(doe) - 719468;
    return days * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t epoch_s) {
    std::int64_t days = epoch_s / 86400;
    std::int64_t rem = epoch_s % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    // civil-from-days inverse.
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y + (m <= 2)), m, d,
                  static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::vector<Alert> load_alerts(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::vector<Alert> alerts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": malformed alert line: " + e.what());
        }
        Alert a;
        try {
            a.timestamp = j.at("timestamp").get<std::string>();
            a.category = j.at("category").get<std::string>();
            a.severity = j.at("severity").get<int>();
            a.src_host = j.at("src_host").get<std::string>();
            a.dst_host = j.at("dst_host").get<std::string>();
            if (j.contains("stage_hint")) {
                a.stage_hint = j.at("stage_hint").get<std::string>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": malformed alert line: " + e.what());
        }
        if (a.severity < 1 || a.severity > 3) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": severity " + std::to_string(a.severity) +
                            " outside {1,2,3}");
        }
        a.epoch_s = parse_timestamp(a.timestamp);
        alerts.push_back(std::move(a));
    }
    std::stable_sort(alerts.begin(), alerts.end(),
                     [](const Alert& x, const Alert& y) {
                         return x.epoch_s < y.epoch_s;
                     });
    return alerts;
}

void write_alerts(const std::vector<Alert>& alerts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (const auto& a : alerts) {
        nlohmann::json j;
        j["timestamp"] = a.timestamp;
        j["category"] = a.category;
        j["severity"] = a.severity;
        j["src_host"] = a.src_host;
        j["dst_host"] = a.dst_host;
        if (a.stage_hint) j["stage_hint"] = *a.stage_hint;
        out << j.dump() << "\n";
    }
}

}  // namespace aptshield::ingest
