#include "aptshield/serialize.hpp"

#include <fstream>

namespace aptshield::io {

void save_matrix(const num::Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write matrix file: " + path);
    out << "APTSHIELD-MAT 1\n";
    write_matrix(out, "data", m);
}

num::Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open matrix file: " + path);
    expect_magic(in, "APTSHIELD-MAT", 1, path);
    return read_matrix(in, "data", path);
}

void save_lines(const std::vector<std::string>& lines, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (const auto& line : lines) out << line << "\n";
}

std::vector<std::string> load_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace aptshield::io
