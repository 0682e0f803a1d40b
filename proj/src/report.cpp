#include "qdl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qdl/numeric.hpp"

namespace qdl {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw DomainError("Table::add_row: expected " + std::to_string(columns.size()) + " cells, got " +
                      std::to_string(row.size()));
  rows.push_back(std::move(row));
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  if (s == "table") return Format::table;
  throw DomainError("unknown format '" + s + "' (expected csv, json or table)");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_cell(const Cell& c) {
  struct V {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(V{}, c);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

nlohmann::ordered_json json_cell(const Cell& c) {
  struct V {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(double v) const {
      if (!std::isfinite(v)) return format_number(v);
      return std::stod(format_number(v));
    }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(const std::string& v) const { return v; }
  };
  return std::visit(V{}, c);
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(format_cell(row[i]));
    out += "\r\n";
  }
  return out;
}

std::string to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["meta"] = t.meta;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = json_cell(row[i]);
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

std::string to_text(const Table& t) {
  std::vector<std::size_t> width(t.columns.size());
  for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : t.rows) {
    std::vector<std::string> r;
    for (std::size_t i = 0; i < row.size(); ++i) {
      r.push_back(format_cell(row[i]));
      width[i] = std::max(width[i], r.back().size());
    }
    cells.push_back(std::move(r));
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << "  ";
      os << std::string(width[i] - r[i].size(), ' ') << r[i];
    }
    os << '\n';
  };
  line(t.columns);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.push_back(std::string(w, '-'));
  line(rule);
  for (const auto& r : cells) line(r);
  return os.str();
}

std::string render(const Table& t, Format f) {
  switch (f) {
    case Format::csv: return to_csv(t);
    case Format::json: return to_json(t);
    case Format::table: return to_text(t);
  }
  throw DomainError("render: unknown format");
}

std::string plot_script(const std::string& csv_path, const std::string& x_column,
                        const std::vector<std::string>& y_columns, bool log_x) {
  std::ostringstream os;
  os << "# Plot template for " << csv_path << "; edit and run with python3.\n"
     << "import csv\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "with open(" << nlohmann::json(csv_path).dump() << ", newline=\"\") as f:\n"
     << "    rows = list(csv.DictReader(f))\n\n"
     << "def column(name):\n"
     << "    return [float(r[name]) if r[name] not in (\"\", None) else float(\"nan\") for r in rows]\n\n"
     << "x = column(" << nlohmann::json(x_column).dump() << ")\n"
     << "fig, ax = plt.subplots()\n";
  for (const auto& y : y_columns)
    os << "ax.plot(x, column(" << nlohmann::json(y).dump() << "), marker=\"o\", label=" << nlohmann::json(y).dump()
       << ")\n";
  if (log_x) os << "ax.set_xscale(\"log\")\n";
  os << "ax.set_xlabel(" << nlohmann::json(x_column).dump() << ")\n"
     << "ax.legend()\n"
     << "fig.savefig(" << nlohmann::json(csv_path + ".png").dump() << ", dpi=150)\n";
  return os.str();
}

}  // namespace qdl
