#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xxz/ct.hpp"
#include "xxz/gap.hpp"
#include "xxz/graph.hpp"
#include "xxz/isoperimetry.hpp"

namespace xxz::io {

// All floating-point artifact output goes through this: fixed 17 significant
// digits so files are byte-identical across runs and worker counts.
inline std::string format_g17(double x) {
  if (!std::isfinite(x))
    throw std::invalid_argument("artifact values must be finite");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline std::string json_str(std::string_view s) {
  return "\"" + json_escape(s) + "\"";
}
inline std::string json_num(double x) { return format_g17(x); }
inline std::string json_int(std::int64_t x) { return std::to_string(x); }
inline std::string json_uint(std::uint64_t x) { return std::to_string(x); }
inline std::string json_bool(bool b) { return b ? "true" : "false"; }

inline std::string json_arr(const std::vector<std::string>& encoded) {
  std::string out = "[";
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (i) out += ",";
    out += encoded[i];
  }
  return out + "]";
}

// Ordered object from pre-encoded values; key order is emission order.
inline std::string json_obj(
    const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string out = "{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ",";
    out += json_str(fields[i].first) + ":" + fields[i].second;
  }
  return out + "}";
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv_hex(std::string_view s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(s)));
  return buf;
}

inline void write_file(const std::filesystem::path& path,
                       std::string_view content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CsvBuilder {
 public:
  explicit CsvBuilder(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      if (!first) body_ += ",";
      body_ += h;
      first = false;
    }
    body_ += "\n";
  }
  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) body_ += ",";
      body_ += c;
      first = false;
    }
    body_ += "\n";
  }
  const std::string& str() const { return body_; }

 private:
  std::string body_;
};

// Canonical graph serialization; parses back via parse_graph and doubles as
// the hashing key for summaries.
inline std::string graph_json(const BaseGraph& g) {
  std::vector<std::string> edges;
  edges.reserve(g.edges().size());
  for (const auto& e : g.edges())
    edges.push_back(json_arr({json_int(e[0]), json_int(e[1])}));
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(g.vertex_count()));
  for (const std::string& l : g.labels()) labels.push_back(json_str(l));
  return json_obj({{"vertex_count", json_int(g.vertex_count())},
                   {"edges", json_arr(edges)},
                   {"labels", json_arr(labels)}}) +
         "\n";
}

inline std::string spectrum_csv(const std::vector<double>& values) {
  CsvBuilder csv{"index", "value"};
  for (std::size_t i = 0; i < values.size(); ++i)
    csv.row({std::to_string(i), format_g17(values[i])});
  return csv.str();
}

inline std::string catalog_json(const DropletCatalog& cat) {
  std::vector<std::string> mins;
  mins.reserve(cat.minimizers.size());
  for (const auto& x : cat.minimizers) {
    std::vector<std::string> row;
    row.reserve(x.size());
    for (int v : x) row.push_back(json_int(v));
    mins.push_back(json_arr(row));
  }
  return json_obj({{"N", json_int(cat.particles)},
                   {"D_min", json_int(cat.d_min)},
                   {"second_level", json_int(cat.second_level)},
                   {"minimizers", json_arr(mins)}}) +
         "\n";
}

inline std::string certificate_json(const GapCertificate& cert,
                                    const CertificateVerification* check) {
  std::vector<std::pair<std::string, std::string>> fields{
      {"g", json_num(cert.g)},
      {"a", json_num(cert.a)},
      {"b", json_num(cert.b)},
      {"d1", json_int(cert.d1)},
      {"d2", json_int(cert.d2)},
      {"a2_norm", json_num(cert.a2_norm)},
      {"a2_source", json_str(cert.a2_source)},
      {"partition", json_str(cert.partition_descriptor)},
      {"v1_size", json_uint(cert.v1_size)},
      {"v2_size", json_uint(cert.v2_size)},
      {"empty", json_bool(cert.empty)}};
  if (cert.empty) {
    fields.emplace_back("empty_reason", json_str(cert.empty_reason));
  } else {
    fields.emplace_back("interval", json_arr({json_num(cert.interval_lo),
                                              json_num(cert.interval_hi)}));
  }
  if (check) {
    fields.emplace_back(
        "verification",
        json_obj({{"pass", json_bool(check->pass)},
                  {"eigenvalues_inside", json_int(check->eigs_inside)},
                  {"count_below_upper", json_int(check->count_below_upper)},
                  {"v2_size", json_uint(check->v2_size)},
                  {"nearest_below", json_num(check->nearest_below)},
                  {"nearest_above", json_num(check->nearest_above)}}));
  }
  return json_obj(fields) + "\n";
}

inline std::string ct_report_csv(const CTReport& report) {
  CsvBuilder csv{"delta", "E", "distance", "lhs", "rhs", "eta", "margin"};
  for (const CTRow& r : report.rows)
    csv.row({format_g17(r.delta_ct), format_g17(r.e_re),
             std::to_string(r.distance), format_g17(r.lhs), format_g17(r.rhs),
             format_g17(r.eta), format_g17(r.margin)});
  return csv.str();
}

inline std::string shells_json(const std::vector<ShellRow>& shells) {
  std::vector<std::string> rows;
  rows.reserve(shells.size());
  for (const ShellRow& s : shells)
    rows.push_back(json_obj({{"distance", json_int(s.distance)},
                             {"members", json_uint(s.members)},
                             {"norm", json_num(s.norm)},
                             {"bound", json_num(s.bound)}}));
  return json_arr(rows);
}

}  // namespace xxz::io
