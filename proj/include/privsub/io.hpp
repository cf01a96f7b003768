#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "privsub/errors.hpp"
#include "privsub/trace.hpp"

namespace privsub {

inline constexpr const char* kVisibleHeader = "k,agent,coord,value,u,alpha";
inline constexpr const char* kOracleHeader = "k,agent,coord,d,chi,r,omega";

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DomainError("bad number '" + s + "' in trace");
  return v;
}

// Rows ordered by (k, agent, coord); agents carry their 1-based network ids.
// u and alpha are blank where they do not exist (k = K, or no malicious
// agent, or an asynchronous run).
inline void write_visible_csv(std::ostream& out, const VisibleTrace& t) {
  out << kVisibleHeader << '\n';
  for (long k = 0; k <= t.horizon(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const auto& x = t.states[ks];
    for (int a = 0; a < t.agent_count(); ++a) {
      for (int c = 0; c < t.dimension; ++c) {
        out << k << ',' << t.agents[static_cast<std::size_t>(a)] + 1 << ',' << c << ',' << format_double(x(a, c)) << ',';
        if (ks < t.inputs.size()) out << format_double(t.inputs[ks](c));
        out << ',';
        if (ks < t.stepsizes.size()) out << format_double(t.stepsizes[ks]);
        out << '\n';
      }
    }
  }
}

inline void write_oracle_csv(std::ostream& out, const OracleTrace& o, const VisibleTrace& t) {
  out << kOracleHeader << '\n';
  for (std::size_t k = 0; k < o.subgradients.size(); ++k) {
    for (int a = 0; a < t.agent_count(); ++a) {
      for (int c = 0; c < t.dimension; ++c) {
        out << k << ',' << t.agents[static_cast<std::size_t>(a)] + 1 << ',' << c << ','
            << format_double(o.subgradients[k](a, c)) << ',';
        if (o.asynchronous())
          out << o.update_flags[k][static_cast<std::size_t>(a)] << ',' << o.counters[k][static_cast<std::size_t>(a)]
              << ',' << format_double(o.omega[k](a, c));
        else
          out << ",,";
        out << '\n';
      }
    }
  }
}

namespace io_detail {
inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

struct Row {
  long k;
  int agent;
  int coord;
  std::vector<std::string> fields;
};

inline std::vector<Row> read_rows(std::istream& in, const char* header, std::size_t width) {
  std::string line;
  if (!std::getline(in, line) || split(line) != split(header))
    throw DomainError(std::string("trace file header must be '") + header + "'");
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != width) throw DomainError("trace row has " + std::to_string(f.size()) + " fields: " + line);
    rows.push_back(Row{std::stol(f[0]), std::stoi(f[1]) - 1, std::stoi(f[2]), std::move(f)});
  }
  return rows;
}

struct Layout {
  long steps = 0;  // number of distinct k
  std::vector<int> agents;
  int dimension = 0;
};

inline Layout layout_of(const std::vector<Row>& rows) {
  Layout l;
  if (rows.empty()) return l;
  std::map<int, bool> seen;
  for (const auto& r : rows) {
    if (r.k == rows.front().k && !seen.count(r.agent)) {
      seen[r.agent] = true;
      l.agents.push_back(r.agent);
    }
    l.dimension = std::max(l.dimension, r.coord + 1);
    l.steps = std::max(l.steps, r.k + 1);
  }
  if (static_cast<long>(rows.size()) != l.steps * static_cast<long>(l.agents.size()) * l.dimension)
    throw DomainError("trace file is not a complete (k, agent, coord) grid");
  return l;
}
}  // namespace io_detail

inline VisibleTrace read_visible_csv(std::istream& in) {
  using namespace io_detail;
  const auto rows = read_rows(in, kVisibleHeader, 6);
  const auto lay = layout_of(rows);
  VisibleTrace t;
  t.agents = lay.agents;
  t.dimension = lay.dimension;
  const auto na = static_cast<Eigen::Index>(lay.agents.size());
  t.states.assign(static_cast<std::size_t>(lay.steps), Eigen::MatrixXd::Zero(na, lay.dimension));
  std::vector<Eigen::VectorXd> inputs(static_cast<std::size_t>(lay.steps), Eigen::VectorXd::Zero(lay.dimension));
  std::vector<double> alphas(static_cast<std::size_t>(lay.steps), 0.0);
  long input_steps = 0, alpha_steps = 0;
  std::size_t idx = 0;
  for (const auto& r : rows) {
    const auto a = static_cast<Eigen::Index>((idx / static_cast<std::size_t>(lay.dimension)) % lay.agents.size());
    ++idx;
    const auto ks = static_cast<std::size_t>(r.k);
    t.states[ks](a, r.coord) = parse_double(r.fields[3]);
    if (!r.fields[4].empty()) {
      inputs[ks](r.coord) = parse_double(r.fields[4]);
      input_steps = std::max(input_steps, r.k + 1);
    }
    if (!r.fields[5].empty()) {
      alphas[ks] = parse_double(r.fields[5]);
      alpha_steps = std::max(alpha_steps, r.k + 1);
    }
  }
  inputs.resize(static_cast<std::size_t>(input_steps));
  alphas.resize(static_cast<std::size_t>(alpha_steps));
  t.inputs = std::move(inputs);
  t.stepsizes = std::move(alphas);
  return t;
}

inline OracleTrace read_oracle_csv(std::istream& in) {
  using namespace io_detail;
  const auto rows = read_rows(in, kOracleHeader, 7);
  const auto lay = layout_of(rows);
  OracleTrace o;
  const auto na = static_cast<Eigen::Index>(lay.agents.size());
  const bool async = !rows.empty() && !rows.front().fields[4].empty();
  o.subgradients.assign(static_cast<std::size_t>(lay.steps), Eigen::MatrixXd::Zero(na, lay.dimension));
  if (async) {
    o.update_flags.assign(static_cast<std::size_t>(lay.steps), std::vector<int>(lay.agents.size(), 0));
    o.counters.assign(static_cast<std::size_t>(lay.steps), std::vector<long>(lay.agents.size(), 0));
    o.omega.assign(static_cast<std::size_t>(lay.steps), Eigen::MatrixXd::Zero(na, lay.dimension));
  }
  std::size_t idx = 0;
  for (const auto& r : rows) {
    const auto a = (idx / static_cast<std::size_t>(lay.dimension)) % lay.agents.size();
    ++idx;
    const auto ks = static_cast<std::size_t>(r.k);
    const auto ai = static_cast<Eigen::Index>(a);
    o.subgradients[ks](ai, r.coord) = parse_double(r.fields[3]);
    if (async) {
      o.update_flags[ks][a] = std::stoi(r.fields[4]);
      o.counters[ks][a] = std::stol(r.fields[5]);
      o.omega[ks](ai, r.coord) = parse_double(r.fields[6]);
    }
  }
  return o;
}

inline VisibleTrace read_visible_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open trace file '" + path + "'");
  return read_visible_csv(in);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write '" + path + "'");
  out << text;
}

}  // namespace privsub
