#include "optcon/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "optcon/errors.hpp"

namespace optcon {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    out.push_back(cell);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("trace line " + std::to_string(line) +
                             ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_trace_csv(const std::filesystem::path& path, const Trajectory& traj,
                     const std::vector<TraceColumn>& extra) {
  for (const auto& col : extra) {
    if (col.values.size() != traj.size() * traj.n_nodes) {
      throw DimensionError("trace column '" + col.name + "' has wrong length");
    }
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "t,node";
  for (Eigen::Index c = 0; c < traj.m; ++c) {
    out << ",comp_" << c;
  }
  for (const auto& col : extra) {
    out << ',' << col.name;
  }
  out << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const std::string t = format_double(traj.times[k]);
    for (std::size_t i = 0; i < traj.n_nodes; ++i) {
      out << t << ',' << i;
      const Vector xi = traj.node_state(k, i);
      for (Eigen::Index c = 0; c < traj.m; ++c) {
        out << ',' << format_double(xi(c));
      }
      for (const auto& col : extra) {
        out << ',' << format_double(col.values[k * traj.n_nodes + i]);
      }
      out << '\n';
    }
  }
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

Trajectory read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path.string() + ": empty trace");
  }
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "node") {
    throw std::runtime_error(path.string() + ": unexpected trace header");
  }
  Trajectory traj;
  while (static_cast<std::size_t>(traj.m) + 2 < header.size() &&
         header[static_cast<std::size_t>(traj.m) + 2] == "comp_" + std::to_string(traj.m)) {
    ++traj.m;
  }
  if (traj.m == 0) {
    throw std::runtime_error(path.string() + ": no comp_ columns");
  }

  std::size_t line_no = 1;
  double current_t = 0.0;
  std::size_t expected_node = 0;
  std::vector<double> block;
  auto flush = [&]() {
    if (!block.empty()) {
      if (traj.n_nodes == 0) {
        traj.n_nodes = expected_node;
      } else if (expected_node != traj.n_nodes) {
        throw std::runtime_error(path.string() + ": sample with missing nodes");
      }
      traj.times.push_back(current_t);
      traj.states.push_back(Eigen::Map<const Vector>(block.data(),
                                                     static_cast<Eigen::Index>(block.size())));
      block.clear();
      expected_node = 0;
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) +
                               " has " + std::to_string(cells.size()) + " cells");
    }
    const double t = parse_double(cells[0], line_no);
    const auto node = static_cast<std::size_t>(parse_double(cells[1], line_no));
    if (node == 0) {
      flush();
      current_t = t;
    } else if (t != current_t || node != expected_node) {
      throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) +
                               " breaks the sample/node ordering");
    }
    for (Eigen::Index c = 0; c < traj.m; ++c) {
      block.push_back(parse_double(cells[static_cast<std::size_t>(c) + 2], line_no));
    }
    ++expected_node;
  }
  flush();
  return traj;
}

}  // namespace optcon
