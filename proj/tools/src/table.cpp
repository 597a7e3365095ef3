#include "table.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "petacat/errors.hpp"

namespace petacat::cli {

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::kCsv;
  if (name == "table") return Format::kTable;
  if (name == "json") return Format::kJson;
  throw ValidationError("unknown format '" + name + "' (expected csv, table or json)");
}

std::string cell_text(const Cell& c) {
  if (c.is_string()) return c.get<std::string>();
  if (c.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", c.get<double>());
    return buf;
  }
  if (c.is_null()) return "";
  return c.dump();
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

void render(const Table& t, Format f, std::ostream& out) {
  switch (f) {
    case Format::kCsv: {
      for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_escape(t.columns[i]);
      out << '\n';
      for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(cell_text(row[i]));
        out << '\n';
      }
      break;
    }
    case Format::kTable: {
      std::vector<std::size_t> width(t.columns.size());
      for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
      for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) width[i] = std::max(width[i], cell_text(row[i]).size());
      }
      auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          out << (i ? "  " : "") << cells[i];
          if (i + 1 < cells.size()) out << std::string(width[i] - std::min(width[i], cells[i].size()), ' ');
        }
        out << '\n';
      };
      line(t.columns);
      std::vector<std::string> rule;
      for (const auto w : width) rule.emplace_back(w, '-');
      line(rule);
      for (const auto& row : t.rows) {
        std::vector<std::string> cells;
        for (const auto& c : row) cells.push_back(cell_text(c));
        line(cells);
      }
      break;
    }
    case Format::kJson: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& row : t.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) obj[t.columns[i]] = row[i];
        arr.push_back(obj);
      }
      out << arr.dump(2) << '\n';
      break;
    }
  }
}

}  // namespace petacat::cli
