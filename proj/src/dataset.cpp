#include "kempc/dataset.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace kempc {

void Dataset::validate() const {
    if (U.rows() != Y.rows()) {
        throw DimensionMismatch("dataset |U| != |Y|: " + std::to_string(U.rows()) + " vs " +
                                std::to_string(Y.rows()));
    }
    if (timestep <= 0.0) throw Error("dataset timestep must be > 0");
    if (U.rows() > 0 && (U.cols() != 3 || Y.cols() != 3)) {
        throw DimensionMismatch("dataset expects 3 inputs and 3 outputs");
    }
}

namespace {

constexpr std::array<const char*, 7> kColumns = {"t", "u1", "u2", "u3", "y1", "y2", "y3"};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void write_dataset_csv(const Dataset& d, const std::filesystem::path& path) {
    d.validate();
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for write: " + path.string());
    f << "t,u1,u2,u3,y1,y2,y3\n";
    char buf[64];
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(k) * d.timestep);
        f << buf;
        for (int j = 0; j < 3; ++j) {
            std::snprintf(buf, sizeof(buf), ",%.17g", d.U(k, j));
            f << buf;
        }
        for (int j = 0; j < 3; ++j) {
            std::snprintf(buf, sizeof(buf), ",%.17g", d.Y(k, j));
            f << buf;
        }
        f << '\n';
    }
    if (!f) throw IoError("write failed: " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for read: " + path.string());

    std::string line;
    if (!std::getline(f, line)) throw ParseError("empty file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_csv(line);
    std::array<int, 7> col_idx{};
    for (size_t c = 0; c < kColumns.size(); ++c) {
        auto it = std::find(header.begin(), header.end(), kColumns[c]);
        if (it == header.end()) {
            throw MissingColumn(std::string("missing column `") + kColumns[c] + "` in " +
                                path.string());
        }
        col_idx[c] = static_cast<int>(it - header.begin());
    }

    std::vector<std::array<double, 7>> rows;
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        std::array<double, 7> row{};
        for (size_t c = 0; c < kColumns.size(); ++c) {
            if (col_idx[c] >= static_cast<int>(fields.size())) {
                throw ParseError("line " + std::to_string(lineno) + ": too few fields");
            }
            const std::string& s = fields[col_idx[c]];
            try {
                size_t pos = 0;
                row[c] = std::stod(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(lineno) + ": bad number `" + s + "`");
            }
        }
        rows.push_back(row);
    }
    if (rows.empty()) throw ParseError("no data rows in " + path.string());

    Dataset d;
    const auto n = static_cast<Eigen::Index>(rows.size());
    d.U.resize(n, 3);
    d.Y.resize(n, 3);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (int j = 0; j < 3; ++j) d.U(k, j) = rows[k][1 + j];
        for (int j = 0; j < 3; ++j) d.Y(k, j) = rows[k][4 + j];
    }
    d.timestep = n >= 2 ? rows[1][0] - rows[0][0] : 1.0;
    if (d.timestep <= 0.0) throw ParseError("non-increasing time column in " + path.string());
    d.validate();
    return d;
}

}  // namespace kempc
