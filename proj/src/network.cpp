#include <queue>

#include "ucrl/errors.hpp"
#include "ucrl/model.hpp"

namespace ucrl {

namespace {

void check_connected(int n_buses, std::span<const Line> lines, int slack_bus) {
  std::vector<std::vector<int>> adjacency(n_buses);
  for (const auto& line : lines) {
    adjacency[line.from].push_back(line.to);
    adjacency[line.to].push_back(line.from);
  }
  std::vector<bool> seen(n_buses, false);
  std::queue<int> frontier;
  frontier.push(slack_bus);
  seen[slack_bus] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int bus = frontier.front();
    frontier.pop();
    for (int next : adjacency[bus]) {
      if (!seen[next]) {
        seen[next] = true;
        ++reached;
        frontier.push(next);
      }
    }
  }
  if (reached != n_buses) {
    for (int b = 0; b < n_buses; ++b)
      if (!seen[b]) throw IslandingError("bus " + std::to_string(b + 1) + " is not connected to the slack bus");
  }
}

// Susceptance matrix with the slack row/column removed; bus k maps to k or k-1.
Eigen::MatrixXd reduced_susceptance(int n_buses, std::span<const Line> lines, int slack_bus) {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n_buses, n_buses);
  for (const auto& line : lines) {
    const double y = 1.0 / line.reactance;
    full(line.from, line.from) += y;
    full(line.to, line.to) += y;
    full(line.from, line.to) -= y;
    full(line.to, line.from) -= y;
  }
  Eigen::MatrixXd reduced(n_buses - 1, n_buses - 1);
  for (int r = 0, rr = 0; r < n_buses; ++r) {
    if (r == slack_bus) continue;
    for (int c = 0, cc = 0; c < n_buses; ++c) {
      if (c == slack_bus) continue;
      reduced(rr, cc++) = full(r, c);
    }
    ++rr;
  }
  return reduced;
}

int reduced_index(int bus, int slack_bus) { return bus < slack_bus ? bus : bus - 1; }

}  // namespace

Eigen::MatrixXd bus_ptdf(int n_buses, std::span<const Line> lines, int slack_bus) {
  const int n_lines = static_cast<int>(lines.size());
  Eigen::MatrixXd ptdf = Eigen::MatrixXd::Zero(n_buses, n_lines);
  if (n_buses == 1 || n_lines == 0) {
    if (n_buses > 1) check_connected(n_buses, lines, slack_bus);
    return ptdf;
  }
  check_connected(n_buses, lines, slack_bus);
  const Eigen::MatrixXd b_red = reduced_susceptance(n_buses, lines, slack_bus);
  const Eigen::LDLT<Eigen::MatrixXd> factor(b_red);
  // Column k of the inverse holds bus angles for a unit injection at bus k.
  const Eigen::MatrixXd angles = factor.solve(Eigen::MatrixXd::Identity(n_buses - 1, n_buses - 1));
  for (int bus = 0; bus < n_buses; ++bus) {
    if (bus == slack_bus) continue;
    const int k = reduced_index(bus, slack_bus);
    for (int l = 0; l < n_lines; ++l) {
      const auto& line = lines[l];
      const double th_from = line.from == slack_bus ? 0.0 : angles(reduced_index(line.from, slack_bus), k);
      const double th_to = line.to == slack_bus ? 0.0 : angles(reduced_index(line.to, slack_bus), k);
      ptdf(bus, l) = (th_from - th_to) / line.reactance;
    }
  }
  return ptdf;
}

Ptdf compute_ptdf(const GridSpec& grid) {
  Ptdf out;
  out.load = bus_ptdf(grid.n_buses, grid.lines, grid.slack_bus);
  out.unit.resize(grid.n_units(), grid.n_lines());
  for (int i = 0; i < grid.n_units(); ++i) out.unit.row(i) = out.load.row(grid.units[i].bus);
  return out;
}

void attach_ptdf(GridSpec& grid) {
  auto ptdf = compute_ptdf(grid);
  grid.ptdf_unit = std::move(ptdf.unit);
  grid.ptdf_load = std::move(ptdf.load);
}

Eigen::VectorXd dc_flows_direct(int n_buses, std::span<const Line> lines, int slack_bus,
                                std::span<const double> injection) {
  check_connected(n_buses, lines, slack_bus);
  const int n_lines = static_cast<int>(lines.size());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_buses);
  if (n_buses > 1) {
    Eigen::VectorXd rhs(n_buses - 1);
    for (int bus = 0; bus < n_buses; ++bus)
      if (bus != slack_bus) rhs(reduced_index(bus, slack_bus)) = injection[bus];
    const Eigen::VectorXd sol = reduced_susceptance(n_buses, lines, slack_bus).fullPivLu().solve(rhs);
    for (int bus = 0; bus < n_buses; ++bus)
      if (bus != slack_bus) theta(bus) = sol(reduced_index(bus, slack_bus));
  }
  Eigen::VectorXd flows(n_lines);
  for (int l = 0; l < n_lines; ++l) flows(l) = (theta(lines[l].from) - theta(lines[l].to)) / lines[l].reactance;
  return flows;
}

}  // namespace ucrl
