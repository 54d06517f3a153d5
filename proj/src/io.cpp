#include "logprox/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "logprox/error.hpp"

namespace logprox::io {

namespace {

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

Index parse_index(const std::string& tok, std::string_view source, std::size_t line) {
  Index v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorCode::ParseError, where(source, line) + ": expected an integer, got '" + tok + "'");
  return v;
}

double parse_double(std::string tok, std::string_view source, std::size_t line) {
  while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.pop_back();
  std::size_t start = 0;
  while (start < tok.size() && std::isspace(static_cast<unsigned char>(tok[start]))) ++start;
  tok = tok.substr(start);
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, where(source, line) + ": expected a number, got '" + tok + "'");
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return f;
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
  auto f = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  const std::string src = path.string();
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell, src, lineno));
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::ParseError, where(src, lineno) + ": row has " + std::to_string(row.size()) +
                                             " columns, expected " + std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, src + ": no data rows");
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dag read_graph(std::istream& is, std::string_view source) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<Index> nodes;
  std::vector<Index> dims;
  std::vector<Edge> edges;
  while (std::getline(is, line)) {
    ++lineno;
    const auto toks = split_ws(strip_comment(line));
    if (toks.empty()) continue;
    if (!nodes) {
      if (toks.size() != 2 || toks[0] != "nodes")
        throw Error(ErrorCode::ParseError, where(source, lineno) + ": expected 'nodes N'");
      nodes = parse_index(toks[1], source, lineno);
      continue;
    }
    if (toks[0] == "dims") {
      if (!dims.empty() || !edges.empty())
        throw Error(ErrorCode::ParseError, where(source, lineno) + ": 'dims' must directly follow 'nodes'");
      for (std::size_t k = 1; k < toks.size(); ++k) dims.push_back(parse_index(toks[k], source, lineno));
      if (static_cast<Index>(dims.size()) != *nodes)
        throw Error(ErrorCode::ParseError, where(source, lineno) + ": 'dims' lists " +
                                               std::to_string(dims.size()) + " values for " +
                                               std::to_string(*nodes) + " nodes");
      continue;
    }
    if (toks.size() != 2)
      throw Error(ErrorCode::ParseError, where(source, lineno) + ": expected an edge 'u v'");
    edges.emplace_back(parse_index(toks[0], source, lineno), parse_index(toks[1], source, lineno));
  }
  if (!nodes) throw Error(ErrorCode::ParseError, std::string(source) + ": missing 'nodes N' header");
  try {
    return validate_dag(*nodes, std::move(edges), std::move(dims));
  } catch (const Error& e) {
    throw Error(e.code(), std::string(source) + ": " + e.detail());
  }
}

Dag read_graph_file(const std::filesystem::path& path) {
  auto f = open_input(path);
  return read_graph(f, path.string());
}

void write_graph(std::ostream& os, const Dag& dag) {
  os << "nodes " << dag.num_nodes() << '\n';
  const auto& dims = dag.node_dims();
  bool trivial = true;
  for (Index d : dims) trivial = trivial && d == 1;
  if (!trivial) {
    os << "dims";
    for (Index d : dims) os << ' ' << d;
    os << '\n';
  }
  for (const auto& [u, v] : dag.edges()) os << u << ' ' << v << '\n';
}

GroupSet read_groups(std::istream& is, std::optional<Index> dim, std::string_view source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<Index>> groups;
  std::vector<double> weights;
  Index max_index = -1;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string body = strip_comment(line);
    if (split_ws(body).empty()) continue;
    const auto colon = body.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::ParseError, where(source, lineno) + ": expected 'w: i1 i2 ...'");
    const double w = parse_double(body.substr(0, colon), source, lineno);
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::ParseError, where(source, lineno) + ": group weight must be a positive number");
    std::vector<Index> grp;
    for (const auto& tok : split_ws(body.substr(colon + 1))) {
      const Index i = parse_index(tok, source, lineno);
      if (i < 0) throw Error(ErrorCode::ParseError, where(source, lineno) + ": negative coordinate index");
      max_index = std::max(max_index, i);
      grp.push_back(i);
    }
    if (grp.empty()) throw Error(ErrorCode::EmptyGroup, where(source, lineno) + ": group lists no coordinates");
    groups.push_back(std::move(grp));
    weights.push_back(w);
  }
  if (groups.empty()) throw Error(ErrorCode::EmptyGroup, std::string(source) + ": no groups");
  const Index d = dim.value_or(max_index + 1);
  try {
    return build_index_map(d, std::move(groups), std::move(weights));
  } catch (const Error& e) {
    throw Error(e.code(), std::string(source) + ": " + e.detail());
  }
}

GroupSet read_groups_file(const std::filesystem::path& path, std::optional<Index> dim) {
  auto f = open_input(path);
  return read_groups(f, dim, path.string());
}

void write_groups(std::ostream& os, const GroupSet& groups) {
  for (Index g = 0; g < groups.num_groups(); ++g) {
    os << format_double(groups.weight(g)) << ':';
    for (Index i : groups.group(g)) os << ' ' << i;
    os << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

Eigen::VectorXd read_vector_csv(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  std::vector<double> flat;
  if (rows.size() == 1) {
    flat = rows.front();
  } else {
    if (rows.front().size() != 1)
      throw Error(ErrorCode::ParseError, path.string() + ": expected a single column");
    for (const auto& r : rows) flat.push_back(r.front());
  }
  return Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Index>(flat.size()));
}

Eigen::VectorXd parse_inline_vector(std::string_view text) {
  std::vector<double> vals;
  std::stringstream ss{std::string(text)};
  std::string cell;
  while (std::getline(ss, cell, ',')) vals.push_back(parse_double(cell, "<inline>", 1));
  if (vals.empty()) throw Error(ErrorCode::ParseError, "<inline>: empty vector");
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Index>(vals.size()));
}

void write_vector_csv(std::ostream& os, const Eigen::VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) os << format_double(v[i]) << '\n';
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_model(std::ostream& os, const Model& model) {
  os << "# logprox model\n";
  os << "d " << model.dim << '\n';
  os << "lambda " << format_double(model.lambda) << '\n';
  os << "groups_hash " << model.groups_hash << '\n';
  os << "loss " << model.loss << '\n';
  os << "beta\n";
  write_vector_csv(os, model.beta);
}

Model read_model(std::istream& is, std::string_view source) {
  Model m;
  std::string line;
  std::size_t lineno = 0;
  bool in_beta = false;
  std::vector<double> beta;
  while (std::getline(is, line)) {
    ++lineno;
    if (in_beta) {
      if (!line.empty()) beta.push_back(parse_double(line, source, lineno));
      continue;
    }
    const auto toks = split_ws(strip_comment(line));
    if (toks.empty()) continue;
    if (toks[0] == "beta") {
      in_beta = true;
    } else if (toks.size() == 2 && toks[0] == "d") {
      m.dim = parse_index(toks[1], source, lineno);
    } else if (toks.size() == 2 && toks[0] == "lambda") {
      m.lambda = parse_double(toks[1], source, lineno);
    } else if (toks.size() == 2 && toks[0] == "groups_hash") {
      m.groups_hash = toks[1];
    } else if (toks.size() == 2 && toks[0] == "loss") {
      m.loss = toks[1];
    } else {
      throw Error(ErrorCode::ParseError, where(source, lineno) + ": unrecognized model header line");
    }
  }
  if (static_cast<Index>(beta.size()) != m.dim)
    throw Error(ErrorCode::ParseError, std::string(source) + ": model declares d = " + std::to_string(m.dim) +
                                           " but lists " + std::to_string(beta.size()) + " coefficients");
  m.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Index>(beta.size()));
  return m;
}

std::string read_text_file(const std::filesystem::path& path) {
  auto f = open_input(path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace logprox::io
