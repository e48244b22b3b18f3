#pragma once

#include <map>
#include <string>
#include <vector>

#include "simcal/common.hpp"

namespace simcal {

// CSV with an optional leading block of `# key=value` metadata lines,
// then a header row, then numeric rows. All the on-disk tables in this
// toolkit share this shape. Tables whose first column is a string label
// (declared via label_columns) keep the label in `labels`; `rows` then
// holds the remaining numeric columns, shifted left by one.
struct CsvTable {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> header;
  std::vector<std::string> labels;  // empty unless a label column was declared
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // index in header, -1 if absent
  int require_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path, const std::vector<std::string>& label_columns = {});
CsvTable parse_csv(const std::string& text, const std::string& origin = "<string>",
                   const std::vector<std::string>& label_columns = {});

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void metadata(const std::string& key, const std::string& value);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  // Mixed row for tables with a leading label column.
  void row(const std::string& label, const std::vector<double>& values);
  void close();

 private:
  void put_line(const std::string& line);
  std::string path_;
  std::string buffer_;
  bool closed_ = false;
  bool header_written_ = false;
  size_t columns_ = 0;
};

}  // namespace simcal
