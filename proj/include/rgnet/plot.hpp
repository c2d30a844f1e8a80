#pragma once

#include <string>
#include <vector>

namespace rgnet {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Comma-separated text without quoting. Throws DataError on ragged rows.
CsvTable parse_csv(const std::string& text);

// Line chart of every numeric column against the "value" column.
std::string render_sweep_svg(const CsvTable& table, const std::string& title);

}  // namespace rgnet
