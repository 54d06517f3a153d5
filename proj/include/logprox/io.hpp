#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "logprox/graph.hpp"

namespace logprox::io {

// Edge-list graph files:
//   nodes N
//   dims d_1 ... d_N      (optional)
//   u v                   (one edge per line, 0-based)
// '#' starts a comment anywhere on a line.
Dag read_graph(std::istream& is, std::string_view source = "<stream>");
Dag read_graph_file(const std::filesystem::path& path);
void write_graph(std::ostream& os, const Dag& dag);

// Group files: one group per line, `w: i1 i2 ...`. Without `dim` the ambient
// dimension is one past the largest index.
GroupSet read_groups(std::istream& is, std::optional<Index> dim = std::nullopt, std::string_view source = "<stream>");
GroupSet read_groups_file(const std::filesystem::path& path, std::optional<Index> dim = std::nullopt);
void write_groups(std::ostream& os, const GroupSet& groups);

/// Headerless numeric CSV, rows = samples.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
/// Single-column CSV (a row of comma-separated values is also accepted).
Eigen::VectorXd read_vector_csv(const std::filesystem::path& path);
Eigen::VectorXd parse_inline_vector(std::string_view text);
void write_vector_csv(std::ostream& os, const Eigen::VectorXd& v);
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

std::string format_double(double v);

/// 64-bit FNV-1a, printed as 16 hex digits in model headers.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t h);

struct Model {
  Index dim = 0;
  double lambda = 0.0;
  std::string groups_hash;
  std::string loss;
  Eigen::VectorXd beta;
};

void write_model(std::ostream& os, const Model& model);
Model read_model(std::istream& is, std::string_view source = "<stream>");

std::string read_text_file(const std::filesystem::path& path);

}  // namespace logprox::io
