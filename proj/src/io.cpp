#include "ucrl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ucrl/errors.hpp"

namespace ucrl {

using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double finite_or_inf(const json& node, const char* key, double fallback) {
  if (!node.contains(key) || node.at(key).is_null()) return fallback;
  return node.at(key).get<double>();
}

UnitSpec parse_unit(const json& j, int position) {
  UnitSpec u;
  u.id = j.value("id", position + 1);
  u.bus = j.at("bus").get<int>() - 1;
  u.p_max = j.at("p_max").get<double>();
  u.p_min = j.at("p_min").get<double>();
  u.a = j.at("a").get<double>();
  u.b = j.at("b").get<double>();
  u.c = j.at("c").get<double>();
  u.startup_stairs = j.at("startup_stairs").get<std::vector<double>>();
  u.shutdown_cost = j.value("shutdown_cost", 0.0);
  u.ramp_up = j.at("ramp_up").get<double>();
  u.ramp_down = j.at("ramp_down").get<double>();
  u.startup_ramp = j.at("startup_ramp").get<double>();
  u.shutdown_ramp = j.at("shutdown_ramp").get<double>();
  u.min_up = j.at("min_up").get<int>();
  u.min_down = j.at("min_down").get<int>();
  u.init_status = j.at("init_status").get<int>();
  u.init_duration = j.at("init_duration").get<int>();
  if (j.contains("init_output") && !j.at("init_output").is_null()) u.init_output = j.at("init_output").get<double>();
  u.available = j.value("available", true);
  return u;
}

Eigen::MatrixXd parse_matrix(const json& j, int rows, int cols, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw StructuralError(std::string(what) + " must have " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw StructuralError(std::string(what) + " row " + std::to_string(r + 1) + " must have " +
                            std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, int line_no) {
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw StructuralError("line " + std::to_string(line_no) + ": cannot parse number '" + cell + "'");
  return value;
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw StructuralError(std::string("grid file: ") + e.what());
  }
  GridSpec grid;
  try {
    grid.name = doc.value("name", std::string("grid"));
    grid.n_buses = doc.at("n_buses").get<int>();
    grid.slack_bus = doc.value("slack_bus", 1) - 1;
    grid.reserve_fraction = doc.value("reserve_fraction", 0.1);
    if (doc.contains("load_shares")) grid.load_shares = doc.at("load_shares").get<std::vector<double>>();
    for (const auto& jl : doc.value("lines", json::array())) {
      Line line;
      line.from = jl.at("from").get<int>() - 1;
      line.to = jl.at("to").get<int>() - 1;
      line.reactance = jl.at("reactance").get<double>();
      line.flow_min = finite_or_inf(jl, "flow_min", -std::numeric_limits<double>::infinity());
      line.flow_max = finite_or_inf(jl, "flow_max", std::numeric_limits<double>::infinity());
      grid.lines.push_back(line);
    }
    const auto& units = doc.at("units");
    for (std::size_t i = 0; i < units.size(); ++i) grid.units.push_back(parse_unit(units[i], static_cast<int>(i)));
    if (doc.contains("ptdf_unit") && doc.contains("ptdf_load")) {
      grid.ptdf_unit = parse_matrix(doc.at("ptdf_unit"), grid.n_units(), grid.n_lines(), "ptdf_unit");
      grid.ptdf_load = parse_matrix(doc.at("ptdf_load"), grid.n_buses, grid.n_lines(), "ptdf_load");
    }
  } catch (const json::exception& e) {
    throw StructuralError(std::string("grid file: ") + e.what());
  }
  if (grid.ptdf_unit.size() == 0 && grid.ptdf_load.size() == 0) {
    // validate endpoints before building the susceptance matrix
    for (const auto& line : grid.lines)
      if (line.from < 0 || line.from >= grid.n_buses || line.to < 0 || line.to >= grid.n_buses)
        throw StructuralError("line endpoint outside 1.." + std::to_string(grid.n_buses));
    if (grid.slack_bus < 0 || grid.slack_bus >= grid.n_buses) throw StructuralError("slack bus out of range");
    attach_ptdf(grid);
  }
  grid.validate();
  return grid;
}

GridSpec read_grid(const std::filesystem::path& path) { return parse_grid(slurp(path)); }

std::string format_grid(const GridSpec& grid) {
  json doc;
  doc["name"] = grid.name;
  doc["n_buses"] = grid.n_buses;
  doc["slack_bus"] = grid.slack_bus + 1;
  doc["reserve_fraction"] = grid.reserve_fraction;
  if (!grid.load_shares.empty()) doc["load_shares"] = grid.load_shares;
  doc["lines"] = json::array();
  for (const auto& line : grid.lines) {
    json jl{{"from", line.from + 1}, {"to", line.to + 1}, {"reactance", line.reactance}};
    if (std::isfinite(line.flow_min)) jl["flow_min"] = line.flow_min;
    if (std::isfinite(line.flow_max)) jl["flow_max"] = line.flow_max;
    doc["lines"].push_back(jl);
  }
  doc["units"] = json::array();
  for (const auto& u : grid.units) {
    json ju{{"id", u.id},
            {"bus", u.bus + 1},
            {"p_max", u.p_max},
            {"p_min", u.p_min},
            {"a", u.a},
            {"b", u.b},
            {"c", u.c},
            {"startup_stairs", u.startup_stairs},
            {"shutdown_cost", u.shutdown_cost},
            {"ramp_up", u.ramp_up},
            {"ramp_down", u.ramp_down},
            {"startup_ramp", u.startup_ramp},
            {"shutdown_ramp", u.shutdown_ramp},
            {"min_up", u.min_up},
            {"min_down", u.min_down},
            {"init_status", u.init_status},
            {"init_duration", u.init_duration}};
    if (u.init_output) ju["init_output"] = *u.init_output;
    if (!u.available) ju["available"] = false;
    doc["units"].push_back(ju);
  }
  doc["ptdf_unit"] = matrix_json(grid.ptdf_unit);
  doc["ptdf_load"] = matrix_json(grid.ptdf_load);
  return doc.dump(2) + "\n";
}

void write_grid(const std::filesystem::path& path, const GridSpec& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructuralError("cannot write " + path.string());
  out << format_grid(grid);
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      throw StructuralError("line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                            " fields, found " + std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw StructuralError("CSV has no header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(slurp(path)); }

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw StructuralError("CSV column '" + name + "' missing");
}

LoadScenario parse_loads(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  LoadScenario loads;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = split_line(line);
    if (!have_header) {
      if (cells.empty() || cells[0] != "period") throw StructuralError("line 1: load header must start with 'period'");
      for (std::size_t j = 1; j < cells.size(); ++j)
        if (cells[j] != "bus_" + std::to_string(j))
          throw StructuralError("line " + std::to_string(line_no) + ": expected column bus_" + std::to_string(j) +
                                ", found '" + cells[j] + "'");
      loads.n_buses = static_cast<int>(cells.size()) - 1;
      if (loads.n_buses < 1) throw StructuralError("load file has no bus columns");
      have_header = true;
      continue;
    }
    if (static_cast<int>(cells.size()) != loads.n_buses + 1)
      throw StructuralError("line " + std::to_string(line_no) + ": expected " + std::to_string(loads.n_buses + 1) +
                            " fields, found " + std::to_string(cells.size()));
    const double period = parse_number(cells[0], line_no);
    if (period != static_cast<double>(loads.horizon + 1))
      throw StructuralError("line " + std::to_string(line_no) + ": periods must be consecutive starting at 1");
    std::vector<double> row(loads.n_buses);
    for (int j = 0; j < loads.n_buses; ++j) {
      row[j] = parse_number(cells[j + 1], line_no);
      if (row[j] < 0) throw StructuralError("line " + std::to_string(line_no) + ": negative demand");
    }
    loads.demand.push_back(std::move(row));
    ++loads.horizon;
  }
  if (!have_header) throw StructuralError("load file is empty");
  loads.validate();
  return loads;
}

LoadScenario read_loads(const std::filesystem::path& path) { return parse_loads(slurp(path)); }

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_loads(const std::filesystem::path& path, const LoadScenario& loads) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructuralError("cannot write " + path.string());
  out << "period";
  for (int j = 1; j <= loads.n_buses; ++j) out << ",bus_" << j;
  out << "\n";
  for (int t = 0; t < loads.horizon; ++t) {
    out << t + 1;
    for (double d : loads.demand[t]) out << "," << format_double(d);
    out << "\n";
  }
}

}  // namespace ucrl
