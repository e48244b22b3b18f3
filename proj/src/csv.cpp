#include "simcal/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "simcal/config.hpp"

namespace simcal {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw SchemaError("missing required column: " + name);
  return c;
}

CsvTable read_csv(const std::string& path, const std::vector<std::string>& label_columns) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path, label_columns);
}

CsvTable parse_csv(const std::string& text, const std::string& origin,
                   const std::vector<std::string>& label_columns) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  bool labeled = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = strip(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto eq = t.find('=');
      if (eq != std::string::npos) {
        std::string key = strip(t.substr(1, eq - 1));
        std::string value = strip(t.substr(eq + 1));
        if (!key.empty()) table.metadata[key] = value;
      }
      continue;
    }
    if (!have_header) {
      for (const auto& name : split_fields(t)) table.header.push_back(strip(name));
      have_header = true;
      labeled = !table.header.empty() &&
                std::find(label_columns.begin(), label_columns.end(), table.header[0]) !=
                    label_columns.end();
      continue;
    }
    const auto fields = split_fields(t);
    if (fields.size() != table.header.size())
      throw ParseError(origin + ": row has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(table.header.size()),
                       lineno);
    std::vector<double> row;
    row.reserve(fields.size());
    for (size_t i = 0; i < fields.size(); ++i) {
      const std::string f = strip(fields[i]);
      if (i == 0 && labeled) {
        table.labels.push_back(f);
        continue;
      }
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (end == f.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(origin + ": field is not a real number: '" + f + "'", lineno,
                         static_cast<int>(i + 1));
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(origin + ": empty file, expected a CSV header", 1);
  return table;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path) {}

CsvWriter::~CsvWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
      // destructor must not throw; an explicit close() reports failures
    }
  }
}

void CsvWriter::metadata(const std::string& key, const std::string& value) {
  if (header_written_) throw Error("metadata must precede the CSV header");
  put_line("# " + key + "=" + value);
}

void CsvWriter::header(const std::vector<std::string>& names) {
  std::string line;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) line += ',';
    line += names[i];
  }
  put_line(line);
  header_written_ = true;
  columns_ = names.size();
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_)
    throw Error("csv row has " + std::to_string(values.size()) + " fields, expected " +
                std::to_string(columns_));
  std::string line;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  put_line(line);
}

void CsvWriter::row(const std::string& label, const std::vector<double>& values) {
  if (values.size() + 1 != columns_)
    throw Error("csv row has " + std::to_string(values.size() + 1) + " fields, expected " +
                std::to_string(columns_));
  std::string line = label;
  for (double v : values) {
    line += ',';
    line += format_double(v);
  }
  put_line(line);
}

void CsvWriter::close() {
  if (closed_) return;
  closed_ = true;
  std::ofstream out(path_);
  if (!out) throw SchemaError("cannot write file: " + path_);
  out << buffer_;
  out.flush();
  if (!out) throw SchemaError("failed writing file: " + path_);
}

void CsvWriter::put_line(const std::string& line) {
  buffer_ += line;
  buffer_ += '\n';
}

}  // namespace simcal
