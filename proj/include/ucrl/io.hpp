#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ucrl/model.hpp"

namespace ucrl {

/// Grid document (JSON): buses, lines and units, bus numbers 1-based.
GridSpec read_grid(const std::filesystem::path& path);
GridSpec parse_grid(const std::string& text);
std::string format_grid(const GridSpec& grid);
void write_grid(const std::filesystem::path& path, const GridSpec& grid);

/// Load CSV with header `period,bus_1,...,bus_M`.
LoadScenario read_loads(const std::filesystem::path& path);
LoadScenario parse_loads(const std::string& text);
void write_loads(const std::filesystem::path& path, const LoadScenario& loads);

/// Minimal CSV table: header plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws StructuralError when missing
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

/// Round-trip formatting for doubles in CSV output.
std::string format_double(double value);

}  // namespace ucrl
