#pragma once

// Report tables and their emission. Output bytes depend only on the table
// contents and the metadata, so a fixed config and seed reproduce every file.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace lelong {

/// Output directory or file could not be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::string name;  // file stem
  std::vector<std::string> headers;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != headers.size()) throw std::logic_error("table " + name + ": row width does not match headers");
    rows.push_back(std::move(row));
  }
};

struct ReportMetadata {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string command;
};

struct ReportBundle {
  ReportMetadata metadata;
  std::vector<Table> tables;
  std::vector<std::string> warnings;  // each distinct warning once, in first-seen order
  bool converged = true;              // false flags partial results

  void warn(const std::string& w) {
    if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
  }
  void warn_all(const std::vector<std::string>& ws, const std::string& prefix = {}) {
    for (const auto& w : ws) warn(prefix + w);
  }
  const Table* find(const std::string& name) const {
    for (const auto& t : tables) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }
};

/// 17 significant digits; nonfinite values spelled inf, -inf, nan.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.headers.size(); ++i) out += (i ? "," : "") + t.headers[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
    out += '\n';
  }
  return out;
}

inline nlohmann::json metadata_json(const ReportBundle& b) {
  return {{"config_hash", b.metadata.config_hash},
          {"seed", b.metadata.seed},
          {"version", b.metadata.version},
          {"command", b.metadata.command},
          {"converged", b.converged},
          {"warnings", b.warnings}};
}

/// Tables as arrays of row objects keyed by header. Nonfinite numbers become strings.
inline nlohmann::json to_json(const ReportBundle& b) {
  nlohmann::json doc = metadata_json(b);
  doc["tables"] = nlohmann::json::object();
  for (const auto& t : b.tables) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t i = 0; i < row.size(); ++i) {
        const auto& c = row[i];
        if (const auto* d = std::get_if<double>(&c)) {
          obj[t.headers[i]] = std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(format_number(*d));
        } else if (const auto* n = std::get_if<std::int64_t>(&c)) {
          obj[t.headers[i]] = *n;
        } else {
          obj[t.headers[i]] = std::get<std::string>(c);
        }
      }
      rows.push_back(std::move(obj));
    }
    doc["tables"][t.name] = {{"headers", t.headers}, {"rows", std::move(rows)}};
  }
  return doc;
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw OutputError(p.string() + ": cannot open for writing");
  out << text;
  out.close();
  if (!out) throw OutputError(p.string() + ": write failed");
}

}  // namespace detail

/// csv: one <table>.csv per table plus metadata.json; json: a single report.json.
/// Returns the written paths in emission order.
inline std::vector<std::filesystem::path> emit_reports(const ReportBundle& b, const std::filesystem::path& dir,
                                                       const std::string& format) {
  if (format != "csv" && format != "json") throw std::invalid_argument("format must be csv or json");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw OutputError(dir.string() + ": cannot create output directory");
  std::vector<std::filesystem::path> written;
  if (format == "csv") {
    for (const auto& t : b.tables) {
      written.push_back(dir / (t.name + ".csv"));
      detail::write_file(written.back(), to_csv(t));
    }
    written.push_back(dir / "metadata.json");
    detail::write_file(written.back(), metadata_json(b).dump(2) + "\n");
  } else {
    written.push_back(dir / "report.json");
    detail::write_file(written.back(), to_json(b).dump(2) + "\n");
  }
  return written;
}

}  // namespace lelong
