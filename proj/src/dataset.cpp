#include "sdt/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "sdt/errors.hpp"
#include "sdt/format.hpp"

namespace sdt {

Dataset::Dataset(Eigen::MatrixXd features, Eigen::VectorXd labels)
    : X(std::move(features)), y(std::move(labels)) {}

Dataset Dataset::from_columns(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DimensionError("feature and label columns differ in length");
    Dataset d;
    d.X.resize(static_cast<Eigen::Index>(x.size()), 1);
    d.y.resize(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        d.X(static_cast<Eigen::Index>(i), 0) = x[i];
        d.y(static_cast<Eigen::Index>(i)) = y[i];
    }
    return d;
}

void Dataset::check() const {
    if (X.rows() != y.size())
        throw DimensionError("dataset has " + std::to_string(X.rows()) + " feature rows but " +
                             std::to_string(y.size()) + " labels");
    if (y.size() == 0) throw DimensionError("dataset is empty");
    if (X.cols() == 0) throw DimensionError("dataset has no features");
    if (!X.allFinite() || !y.allFinite()) throw DomainError("dataset contains non-finite entries");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    Dataset d;
    d.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        d.X.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
        d.y(static_cast<Eigen::Index>(r)) = y(rows[r]);
    }
    return d;
}

std::string to_csv(const Dataset& data) {
    std::string out;
    if (data.n_features() == 1) {
        out += "x,y\n";
    } else {
        for (Eigen::Index j = 0; j < data.n_features(); ++j) out += "x_" + std::to_string(j + 1) + ",";
        out += "y\n";
    }
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.n_features(); ++j) out += format_double(data.X(i, j)) + ",";
        out += format_double(data.y(i)) + "\n";
    }
    return out;
}

Dataset parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::size_t n_cols = 0;
    std::vector<std::vector<double>> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!header_seen) {
            header_seen = true;
            if (cells.size() < 2 || cells.back() != "y")
                throw ParseError("line " + std::to_string(line_no) +
                                 ": header must list the features followed by 'y'");
            n_cols = cells.size();
            continue;
        }
        if (cells.size() != n_cols)
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(n_cols) + " fields, got " + std::to_string(cells.size()));
        std::vector<double> values;
        for (const auto& c : cells) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size())
                throw ParseError("line " + std::to_string(line_no) + ": bad number '" + c + "'");
            values.push_back(v);
        }
        rows.push_back(std::move(values));
    }
    if (!header_seen) throw ParseError("missing CSV header");
    Dataset d;
    d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols - 1));
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j + 1 < n_cols; ++j)
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        d.y(static_cast<Eigen::Index>(i)) = rows[i].back();
    }
    return d;
}

void write_csv(const Dataset& data, const std::filesystem::path& path,
               const std::vector<std::string>& comment_lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (const auto& c : comment_lines) out << "# " << c << "\n";
    out << to_csv(data);
    if (!out) throw IoError("failed writing " + path.string());
}

Dataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string dataset_hash(const Dataset& data) { return sha256_hex(to_csv(data)); }

}  // namespace sdt
