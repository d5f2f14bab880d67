#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sdt {

// Labelled samples: row i of X holds the features of sample i, y(i) its label.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;

    Dataset() = default;
    Dataset(Eigen::MatrixXd features, Eigen::VectorXd labels);

    // One-feature convenience constructor.
    static Dataset from_columns(const std::vector<double>& x, const std::vector<double>& y);

    Eigen::Index size() const { return y.size(); }
    Eigen::Index n_features() const { return X.cols(); }

    // Throws DimensionError/DomainError if the shapes disagree, the set is
    // empty or an entry is not finite.
    void check() const;

    Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

// CSV with header "x,y" (one feature) or "x_1,...,x_Nf,y"; '#' lines are
// comments. Values are printed with round-trip precision.
std::string to_csv(const Dataset& data);
Dataset parse_csv(const std::string& text);

void write_csv(const Dataset& data, const std::filesystem::path& path,
               const std::vector<std::string>& comment_lines = {});
Dataset read_csv(const std::filesystem::path& path);

// SHA-256 (hex) of to_csv(data): a content hash independent of comments.
std::string dataset_hash(const Dataset& data);

std::string sha256_hex(const std::string& bytes);

}  // namespace sdt
