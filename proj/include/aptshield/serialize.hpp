#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "aptshield/errors.hpp"
#include "aptshield/matrix.hpp"

namespace aptshield::io {

// Shortest exact decimal form of a double; reparsing restores the same bits.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_matrix(std::ostream& out, const std::string& name,
                         const num::Matrix& m) {
    out << name << " " << m.rows() << " " << m.cols() << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out << (j ? " " : "") << fmt(m(i, j));
        }
        out << "\n";
    }
}

inline void write_vector(std::ostream& out, const std::string& name,
                         const std::vector<double>& v) {
    out << name << " " << v.size() << "\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
        out << (i ? " " : "") << fmt(v[i]);
    }
    out << "\n";
}

inline void expect_key(std::istream& in, const std::string& key,
                       const std::string& path) {
    std::string word;
    if (!(in >> word) || word != key) {
        throw DataError(path + ": expected '" + key + "', found '" + word + "'");
    }
}

inline void expect_magic(std::istream& in, const std::string& magic,
                         int version, const std::string& path) {
    std::string word;
    int ver = 0;
    if (!(in >> word >> ver) || word != magic || ver != version) {
        throw DataError(path + ": not a " + magic + " v" +
                        std::to_string(version) + " file");
    }
}

template <typename T>
T read_sized(std::istream& in, const std::string& key, const std::string& path) {
    expect_key(in, key, path);
    T value{};
    if (!(in >> value)) throw DataError(path + ": bad value for '" + key + "'");
    return value;
}

inline std::string read_word(std::istream& in, const std::string& key,
                             const std::string& path) {
    expect_key(in, key, path);
    std::string value;
    if (!(in >> value)) throw DataError(path + ": bad value for '" + key + "'");
    return value;
}

inline num::Matrix read_matrix(std::istream& in, const std::string& key,
                               const std::string& path) {
    expect_key(in, key, path);
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) {
        throw DataError(path + ": bad matrix header for '" + key + "'");
    }
    num::Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!(in >> m.data()[i])) {
            throw DataError(path + ": truncated matrix '" + key + "'");
        }
    }
    return m;
}

inline std::vector<double> read_vector(std::istream& in, const std::string& key,
                                       const std::string& path) {
    expect_key(in, key, path);
    std::size_t n = 0;
    if (!(in >> n)) throw DataError(path + ": bad vector header for '" + key + "'");
    std::vector<double> v(n);
    for (auto& x : v) {
        if (!(in >> x)) throw DataError(path + ": truncated vector '" + key + "'");
    }
    return v;
}

// Standalone matrix artifact files ("APTSHIELD-MAT" container).
void save_matrix(const num::Matrix& m, const std::string& path);
num::Matrix load_matrix(const std::string& path);

void save_lines(const std::vector<std::string>& lines, const std::string& path);
std::vector<std::string> load_lines(const std::string& path);

}  // namespace aptshield::io
