#pragma once

// File formats: dense 0/1 CSV, 1-based edge-list TSV with an "n=<n>"
// header, sample bundles (directory + manifest.json), label files and
// block-parameter JSON.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "netdenoise/core_model.hpp"
#include "netdenoise/errors.hpp"

namespace netdenoise::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum class AdjacencyFormat { DenseCsv, EdgeTsv };

inline std::string_view format_name(AdjacencyFormat f) {
  return f == AdjacencyFormat::DenseCsv ? "dense-csv" : "edge-tsv";
}

inline AdjacencyFormat parse_format(std::string_view s) {
  if (s == "dense-csv") return AdjacencyFormat::DenseCsv;
  if (s == "edge-tsv") return AdjacencyFormat::EdgeTsv;
  throw DataError("unknown adjacency format '" + std::string(s) + "'");
}

/// Shortest round-trip decimal form; NaN is written as NA.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& tok, const std::string& where) {
  const std::string t = trim(tok);
  T v{};
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw DataError("bad number '" + t + "' in " + where);
  return v;
}

inline std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

/// Dense CSV of integers, one row per line.
inline std::vector<std::vector<int>> read_int_matrix_csv(const fs::path& p) {
  std::vector<std::vector<int>> rows;
  for (const auto& line : data_lines(read_text(p))) {
    std::vector<int> row;
    for (const auto& tok : split(line, ',')) row.push_back(parse_number<int>(tok, p.string()));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::vector<double>> read_real_matrix_csv(const fs::path& p) {
  std::vector<std::vector<double>> rows;
  for (const auto& line : data_lines(read_text(p))) {
    std::vector<double> row;
    for (const auto& tok : split(line, ',')) row.push_back(parse_number<double>(tok, p.string()));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string dense_csv(const BinaryNetwork& g) {
  std::string out;
  out.reserve(g.size() * g.size() * 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j) out += ',';
      out += g.edge(i, j) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

inline std::string edge_tsv(const BinaryNetwork& g) {
  std::string out = "n=" + std::to_string(g.size()) + "\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (g.edge(i, j)) out += std::to_string(i + 1) + "\t" + std::to_string(j + 1) + "\n";
  return out;
}

inline BinaryNetwork parse_edge_tsv(const std::string& text, const std::string& where) {
  const auto lines = data_lines(text);
  if (lines.empty() || lines.front().rfind("n=", 0) != 0)
    throw DataError(where + ": missing 'n=<n>' header");
  const auto n = parse_number<std::size_t>(lines.front().substr(2), where);
  BinaryNetwork g(n);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = split(lines[k], '\t');
    if (f.size() != 2) throw DataError(where + ": expected 'i<TAB>j' on line " + std::to_string(k + 1));
    const auto i = parse_number<std::size_t>(f[0], where), j = parse_number<std::size_t>(f[1], where);
    if (i < 1 || j < 1 || i > n || j > n) throw DataError(where + ": node index out of range");
    if (i == j) throw DataError(where + ": self-loop at node " + std::to_string(i));
    g.set_edge(i - 1, j - 1, true);
  }
  return g;
}

inline BinaryNetwork read_adjacency(const fs::path& p, AdjacencyFormat f, bool symmetrize_by_or = false) {
  if (f == AdjacencyFormat::EdgeTsv) return parse_edge_tsv(read_text(p), p.string());
  return validate_network(read_int_matrix_csv(p), symmetrize_by_or);
}

/// Guesses the format from the first line ("n=" header means edge-tsv).
inline BinaryNetwork read_adjacency(const fs::path& p) {
  const std::string text = read_text(p);
  if (text.rfind("n=", 0) == 0) return parse_edge_tsv(text, p.string());
  return read_adjacency(p, AdjacencyFormat::DenseCsv);
}

inline void write_adjacency(const fs::path& p, const BinaryNetwork& g, AdjacencyFormat f) {
  write_text(p, f == AdjacencyFormat::DenseCsv ? dense_csv(g) : edge_tsv(g));
}

/// Writes one adjacency file per network plus manifest.json.
inline void write_bundle(const fs::path& dir, const std::vector<BinaryNetwork>& nets,
                         AdjacencyFormat f = AdjacencyFormat::DenseCsv) {
  if (nets.empty()) throw DataError("bundle needs at least one network");
  fs::create_directories(dir);
  json files = json::array();
  const char* ext = f == AdjacencyFormat::DenseCsv ? ".csv" : ".tsv";
  for (std::size_t m = 0; m < nets.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "obs_%04zu%s", m + 1, ext);
    write_adjacency(dir / name, nets[m], f);
    files.push_back(name);
  }
  json manifest = {{"n", nets.front().size()}, {"N", nets.size()}, {"format", format_name(f)}, {"files", files}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline json read_manifest(const fs::path& dir) {
  try {
    return json::parse(read_text(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  }
}

inline std::vector<BinaryNetwork> read_bundle_networks(const fs::path& dir) {
  const json m = read_manifest(dir);
  try {
    const auto n = m.at("n").get<std::size_t>();
    const auto N = m.at("N").get<std::size_t>();
    const auto f = parse_format(m.at("format").get<std::string>());
    const auto files = m.at("files").get<std::vector<std::string>>();
    if (files.size() != N) throw DataError("manifest: N does not match file count");
    std::vector<BinaryNetwork> nets;
    for (const auto& name : files) {
      nets.push_back(read_adjacency(dir / name, f));
      if (nets.back().size() != n) throw DataError(name + ": node count differs from manifest n");
    }
    return nets;
  } catch (const json::exception& e) {
    throw DataError("manifest: " + std::string(e.what()));
  }
}

inline NetworkSample read_bundle(const fs::path& dir) { return vote_matrix(read_bundle_networks(dir)); }

/// One 1-based label per line.
inline std::string labels_text(const Labels& l) {
  std::string out;
  for (std::size_t i = 0; i < l.size(); ++i) out += std::to_string(l[i] + 1) + "\n";
  return out;
}

inline Labels read_labels(const fs::path& p, int K = 0) {
  std::vector<int> a;
  int kmax = 0;
  for (const auto& line : data_lines(read_text(p))) {
    const int v = parse_number<int>(line, p.string());
    if (v < 1) throw DataError(p.string() + ": labels must be >= 1");
    a.push_back(v - 1);
    kmax = std::max(kmax, v);
  }
  return Labels(std::move(a), std::max(K, kmax));
}

inline json matrix_json(const SquareMatrix<double>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

inline SquareMatrix<double> matrix_from_json(const json& j, std::size_t K) {
  SquareMatrix<double> m(K);
  if (!j.is_array() || j.size() != K) throw DataError("block matrix must be K x K");
  for (std::size_t a = 0; a < K; ++a) {
    if (!j[a].is_array() || j[a].size() != K) throw DataError("block matrix must be K x K");
    for (std::size_t b = 0; b < K; ++b) m(a, b) = j[a][b].get<double>();
  }
  return m;
}

inline json block_params_json(const BlockParams& bp) {
  std::vector<int> one_based;
  for (int c : bp.labels.assignment()) one_based.push_back(c + 1);
  return {{"K", bp.communities()}, {"labels", one_based}, {"B", matrix_json(bp.B)},
          {"P", matrix_json(bp.P)}, {"Q", matrix_json(bp.Q)}};
}

inline BlockParams block_params_from_json(const json& j) {
  try {
    const int K = j.at("K").get<int>();
    std::vector<int> a = j.at("labels").get<std::vector<int>>();
    for (int& c : a) c -= 1;
    const auto Ks = std::size_t(K);
    BlockParams bp{Labels(std::move(a), K), matrix_from_json(j.at("B"), Ks), matrix_from_json(j.at("P"), Ks),
                   matrix_from_json(j.at("Q"), Ks)};
    bp.validate();
    return bp;
  } catch (const json::exception& e) {
    throw DataError("block parameters: " + std::string(e.what()));
  }
}

/// K x K matrix as CSV.
inline std::string matrix_csv(const SquareMatrix<double>& m) {
  std::string out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace netdenoise::io
