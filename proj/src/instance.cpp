#include "jssp/instance.hpp"

#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "jssp/error.hpp"
#include "jssp/rng.hpp"

namespace jssp {

void check_instance(const Instance& inst) {
  if (inst.num_jobs < 1 || inst.num_machines < 1)
    throw DimensionError("instance needs at least one job and one machine");
  if (static_cast<int>(inst.routing.size()) != inst.num_jobs ||
      static_cast<int>(inst.proc_times.size()) != inst.num_jobs)
    throw DimensionError("instance has inconsistent job count");
  for (int j = 0; j < inst.num_jobs; ++j) {
    const auto& route = inst.routing[j];
    const auto& times = inst.proc_times[j];
    if (static_cast<int>(route.size()) != inst.num_machines ||
        static_cast<int>(times.size()) != inst.num_machines)
      throw DimensionError("job " + std::to_string(j) + " has wrong number of operations");
    std::vector<bool> seen(inst.num_machines, false);
    for (int k = 0; k < inst.num_machines; ++k) {
      const int m = route[k];
      if (m < 0 || m >= inst.num_machines || seen[m])
        throw DimensionError("job " + std::to_string(j) + " routing is not a permutation");
      seen[m] = true;
      if (times[k] < 1)
        throw DimensionError("job " + std::to_string(j) + " has non-positive processing time");
    }
  }
}

Instance generate_instance(int num_jobs, int num_machines, std::uint64_t seed) {
  if (num_jobs < 1 || num_machines < 1)
    throw DimensionError("generate_instance: dimensions must be positive");
  Rng rng(seed);
  Instance inst;
  inst.num_jobs = num_jobs;
  inst.num_machines = num_machines;
  inst.routing.resize(num_jobs);
  inst.proc_times.resize(num_jobs);
  for (int j = 0; j < num_jobs; ++j) {
    auto& times = inst.proc_times[j];
    times.resize(num_machines);
    for (auto& p : times) p = static_cast<int>(rng.uniform_int(1, 99));
    auto& route = inst.routing[j];
    route.resize(num_machines);
    std::iota(route.begin(), route.end(), 0);
    for (int i = num_machines - 1; i > 0; --i) {
      const auto k = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(route[i], route[k]);
    }
  }
  return inst;
}

namespace {

// Splits into (line_number, content) pairs, skipping blank and comment lines.
std::vector<std::pair<int, std::string>> content_lines(std::string_view text) {
  std::vector<std::pair<int, std::string>> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string line(text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos));
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] != '#') out.emplace_back(line_no, line);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

std::vector<long long> parse_ints(const std::string& line, int line_no) {
  std::istringstream is(line);
  std::vector<long long> out;
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected integer, got '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

Instance parse_taillard(std::string_view text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError("line 1: missing header");
  const auto header = parse_ints(lines[0].second, lines[0].first);
  if (header.size() != 2 || header[0] < 1 || header[1] < 1)
    throw ParseError("line " + std::to_string(lines[0].first) + ": header must be 'num_jobs num_machines'");
  Instance inst;
  inst.num_jobs = static_cast<int>(header[0]);
  inst.num_machines = static_cast<int>(header[1]);
  if (static_cast<long long>(lines.size()) != header[0] + 1) {
    const int at = lines.size() > static_cast<std::size_t>(inst.num_jobs) ? lines[inst.num_jobs + 1].first
                                                                        : lines.back().first;
    throw ParseError("line " + std::to_string(at) + ": expected " + std::to_string(inst.num_jobs) +
                     " job lines, found " + std::to_string(lines.size() - 1));
  }
  inst.routing.resize(inst.num_jobs);
  inst.proc_times.resize(inst.num_jobs);
  for (int j = 0; j < inst.num_jobs; ++j) {
    const auto& [line_no, line] = lines[j + 1];
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto values = parse_ints(line, line_no);
    if (values.size() != 2 * static_cast<std::size_t>(inst.num_machines))
      throw ParseError(where + "expected " + std::to_string(inst.num_machines) + " (machine, time) pairs");
    std::vector<bool> seen(inst.num_machines, false);
    for (int k = 0; k < inst.num_machines; ++k) {
      const auto m = values[2 * k];
      const auto p = values[2 * k + 1];
      if (m < 0 || m >= inst.num_machines)
        throw ParseError(where + "machine index " + std::to_string(m) + " out of range");
      if (seen[m]) throw ParseError(where + "machine " + std::to_string(m) + " listed twice");
      if (p < 1 || p > std::numeric_limits<int>::max())
        throw ParseError(where + "processing time must be a positive integer");
      seen[m] = true;
      inst.routing[j].push_back(static_cast<int>(m));
      inst.proc_times[j].push_back(static_cast<int>(p));
    }
  }
  return inst;
}

std::string write_taillard(const Instance& inst) {
  std::string out = std::to_string(inst.num_jobs) + " " + std::to_string(inst.num_machines) + "\n";
  for (int j = 0; j < inst.num_jobs; ++j) {
    for (int k = 0; k < inst.num_machines; ++k) {
      if (k) out += ' ';
      out += std::to_string(inst.routing[j][k]);
      out += ' ';
      out += std::to_string(inst.proc_times[j][k]);
    }
    out += '\n';
  }
  return out;
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open instance file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_taillard(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_instance_file(const std::string& path, const Instance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write instance file " + path);
  out << write_taillard(inst);
}

}  // namespace jssp
