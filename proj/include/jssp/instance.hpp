#ifndef JSSP_INSTANCE_HPP
#define JSSP_INSTANCE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace jssp {

// Job shop problem: every job visits every machine exactly once, in the
// order given by its routing row. Operation (job, k) is the k-th operation of
// the job; its flat id is job * num_machines + k.
struct Instance {
  int num_jobs = 0;
  int num_machines = 0;
  std::vector<std::vector<int>> routing;     // [job][k] -> machine
  std::vector<std::vector<int>> proc_times;  // [job][k] -> time units, >= 1

  int num_operations() const { return num_jobs * num_machines; }
  int op_id(int job, int k) const { return job * num_machines + k; }
  int job_of(int op) const { return op / num_machines; }
  int index_in_job(int op) const { return op % num_machines; }
  int machine_of(int op) const { return routing[job_of(op)][index_in_job(op)]; }
  int proc_time_of(int op) const { return proc_times[job_of(op)][index_in_job(op)]; }

  bool operator==(const Instance&) const = default;
};

// Throws DimensionError when the invariants (permutation rows, p >= 1,
// consistent row lengths) do not hold.
void check_instance(const Instance& inst);

// Processing times uniform on [1, 99]; routing rows are independent
// Fisher-Yates permutations. Deterministic in the seed.
Instance generate_instance(int num_jobs, int num_machines, std::uint64_t seed);

// Taillard-style text: optional '#' comment lines, a "jobs machines" header,
// then one line per job of (machine, time) pairs. Machines are 0-based.
Instance parse_taillard(std::string_view text);
std::string write_taillard(const Instance& inst);

Instance read_instance_file(const std::string& path);
void write_instance_file(const std::string& path, const Instance& inst);

}  // namespace jssp

#endif  // JSSP_INSTANCE_HPP
