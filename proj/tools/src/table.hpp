#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace petacat::cli {

enum class Format { kCsv, kTable, kJson };

Format parse_format(const std::string& name);

using Cell = nlohmann::ordered_json;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

std::string cell_text(const Cell& c);

/// CSV with a header, an aligned text table, or a JSON array of objects.
void render(const Table& t, Format f, std::ostream& out);

}  // namespace petacat::cli
