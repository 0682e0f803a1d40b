// Tabular results and their CSV, JSON and plain-text renderings, plus the
// plot-script template written next to CSV output.
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace qdl {

/// Empty cells (std::monostate) render as an empty CSV field, JSON null and a
/// blank in text tables.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();

  void add_row(std::vector<Cell> row);
};

enum class Format { csv, json, table };
Format parse_format(const std::string& s);

/// 12 significant digits, C locale, "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double v);
std::string format_cell(const Cell& c);

/// RFC 4180: comma separated, CRLF line ends, fields quoted when they contain
/// a comma, quote, CR or LF, quotes doubled. The header row is always present.
std::string to_csv(const Table& t);

/// {"meta": ..., "rows": [{column: value, ...}, ...]} with numbers rounded
/// to 12 significant digits.
std::string to_json(const Table& t);

/// Right-aligned columns for reading in a terminal.
std::string to_text(const Table& t);

std::string render(const Table& t, Format f);

/// A matplotlib script that reads csv_path and plots the y columns against x.
/// It is written, never run.
std::string plot_script(const std::string& csv_path, const std::string& x_column,
                        const std::vector<std::string>& y_columns, bool log_x);

}  // namespace qdl
