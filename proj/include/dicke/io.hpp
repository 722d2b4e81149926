// Copyright 2026 The dicke-trajectories Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DICKE__IO_HPP_
#define DICKE__IO_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dicke/errors.hpp"
#include "dicke/precision.hpp"

namespace dicke::io
{

inline constexpr const char * kSchemaVersion = "dicke-output/1";

/// Shortest round-trip decimal; "nan", "inf", "-inf" for non-finite values.
inline std::string format(double value)
{
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline std::string format(std::int64_t value) {return std::to_string(value);}
inline std::string format(std::uint64_t value) {return std::to_string(value);}
inline std::string format(int value) {return std::to_string(value);}
inline std::string format(unsigned value) {return std::to_string(value);}
inline std::string format(bool value) {return value ? "true" : "false";}
inline std::string format(std::string value) {return value;}
inline std::string format(const char * value) {return value;}

struct Table
{
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  template<class ... Ts>
  void add_row(const Ts & ... values)
  {
    if (sizeof...(Ts) != columns.size()) {
      throw ValidationError("table '" + name + "': row width does not match the header");
    }
    rows.push_back({format(values)...});
  }

  void add_row(std::vector<std::string> values)
  {
    if (values.size() != columns.size()) {
      throw ValidationError("table '" + name + "': row width does not match the header");
    }
    rows.push_back(std::move(values));
  }
};

/// Everything one command writes: the resolved configuration, some tables,
/// and optional JSON-only attachments (closed-form expressions).
struct Document
{
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<Table> tables;
  nlohmann::ordered_json attachments = nlohmann::ordered_json::object();

  template<class T>
  void echo(const std::string & key, const T & value)
  {
    config.emplace_back(key, format(value));
  }

  Table & add_table(std::string name, std::vector<std::string> columns)
  {
    tables.push_back(Table{std::move(name), std::move(columns), {}});
    return tables.back();
  }

  const Table & table(std::string_view name) const
  {
    for (const auto & t : tables) {
      if (t.name == name) {
        return t;
      }
    }
    throw ValidationError("document has no table '" + std::string(name) + "'");
  }
};

/// RFC 4180 field: quoted when it holds a comma, quote or line break.
inline std::string csv_field(std::string_view text)
{
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(text);
  }
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

/// CSV with CRLF records. Comment lines starting with '#' carry the schema,
/// the configuration echo and the name of each table ahead of its header.
inline void write_csv(std::ostream & os, const Document & doc)
{
  os << "# schema=" << kSchemaVersion << "\r\n";
  os << "# command=" << doc.command << "\r\n";
  for (const auto & [k, v] : doc.config) {
    os << "# " << k << '=' << v << "\r\n";
  }
  for (std::size_t i = 0; i < doc.tables.size(); ++i) {
    const auto & t = doc.tables[i];
    if (i > 0) {
      os << "\r\n";
    }
    os << "# table=" << t.name << "\r\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      os << (c ? "," : "") << csv_field(t.columns[c]);
    }
    os << "\r\n";
    for (const auto & row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        os << (c ? "," : "") << csv_field(row[c]);
      }
      os << "\r\n";
    }
  }
}

/// JSON with every number carried as a decimal string.
inline nlohmann::ordered_json to_json(const Document & doc)
{
  nlohmann::ordered_json out;
  out["schema"] = kSchemaVersion;
  out["command"] = doc.command;
  out["config"] = nlohmann::ordered_json::object();
  for (const auto & [k, v] : doc.config) {
    out["config"][k] = v;
  }
  out["tables"] = nlohmann::ordered_json::array();
  for (const auto & t : doc.tables) {
    nlohmann::ordered_json jt;
    jt["name"] = t.name;
    jt["columns"] = t.columns;
    jt["rows"] = t.rows;
    out["tables"].push_back(std::move(jt));
  }
  if (!doc.attachments.empty()) {
    out["expressions"] = doc.attachments;
  }
  return out;
}

inline void write_json(std::ostream & os, const Document & doc)
{
  os << to_json(doc).dump(2) << '\n';
}

enum class Format { csv, json };

inline Format parse_format(std::string_view text)
{
  if (text == "csv") {
    return Format::csv;
  }
  if (text == "json") {
    return Format::json;
  }
  throw ValidationError("unknown output format '" + std::string(text) + "' (csv or json)");
}

/// Writes to `path`, or to standard output for "-".
inline void write(const Document & doc, Format format, const std::string & path)
{
  auto emit = [&](std::ostream & os) {
      if (format == Format::csv) {
        write_csv(os, doc);
      } else {
        write_json(os, doc);
      }
    };
  if (path.empty() || path == "-") {
    emit(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  emit(file);
  if (!file) {
    throw ResourceError("write to '" + path + "' failed");
  }
}

}  // namespace dicke::io

#endif  // DICKE__IO_HPP_
