#pragma once

// Minimal CSV support: quoted fields, escaped quotes, CRLF tolerance.
// Rows remember their source line for error reporting.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tonepanel/common.hpp"

namespace tonepanel::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline Table parse(std::istream& in, const std::string& origin) {
  Table t;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false, any = false;
  int line = 1, row_start_line = 1;

  auto end_field = [&] {
    fields.push_back(field);
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    if (t.header.empty()) {
      t.header = fields;
    } else {
      if (fields.size() != t.header.size())
        throw Error(origin + " line " + std::to_string(row_start_line) + ": expected " +
                    std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
      t.rows.push_back(fields);
      t.line_numbers.push_back(row_start_line);
    }
    fields.clear();
    row_start_line = line;
  };

  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      ++line;
      end_row();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw Error(origin + ": unterminated quoted field");
  if (!field.empty() || !fields.empty()) end_row();
  if (!any || t.header.empty()) throw Error(origin + ": empty file");
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return parse(in, path);
}

inline std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open " + path + " for writing");
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << '\n';
  }
  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

}  // namespace tonepanel::csv
