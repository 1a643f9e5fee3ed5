#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "jssp/error.hpp"
#include "jssp/instance.hpp"
#include "jssp/rng.hpp"

using namespace jssp;

TEST_CASE("generated instances satisfy the invariants") {
  const auto inst = generate_instance(6, 6, 200);
  CHECK(inst.num_operations() == 36);
  CHECK_NOTHROW(check_instance(inst));
  for (int j = 0; j < 6; ++j) {
    auto row = inst.routing[j];
    std::sort(row.begin(), row.end());
    std::vector<int> expected(6);
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(row == expected);
    for (int p : inst.proc_times[j]) {
      CHECK(p >= 1);
      CHECK(p <= 99);
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  CHECK(generate_instance(10, 10, 42) == generate_instance(10, 10, 42));
  CHECK_FALSE(generate_instance(10, 10, 42) == generate_instance(10, 10, 43));
  const auto one = generate_instance(1, 1, 7);
  CHECK(one.num_operations() == 1);
  CHECK(one.routing[0][0] == 0);
}

TEST_CASE("generation rejects empty dimensions") {
  CHECK_THROWS_AS(generate_instance(0, 3, 1), DimensionError);
  CHECK_THROWS_AS(generate_instance(3, 0, 1), DimensionError);
}

TEST_CASE("mean processing time over 1000 seeds is close to 50") {
  double sum = 0;
  long count = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto inst = generate_instance(10, 10, seed);
    for (const auto& row : inst.proc_times)
      for (int p : row) {
        sum += p;
        ++count;
      }
  }
  CHECK(std::abs(sum / count - 50.0) < 1.5);
}

TEST_CASE("processing times pass a chi-squared uniformity test") {
  // 1e5 cells over 99 bins; 147.01 is the 0.999 quantile of chi2 with 98 dof.
  std::vector<long> counts(100, 0);
  long total = 0;
  for (std::uint64_t seed = 0; total < 100000; ++seed) {
    const auto inst = generate_instance(10, 10, 1000 + seed);
    for (const auto& row : inst.proc_times)
      for (int p : row) {
        ++counts[p];
        ++total;
      }
  }
  const double expected = static_cast<double>(total) / 99.0;
  double stat = 0;
  for (int v = 1; v <= 99; ++v) stat += (counts[v] - expected) * (counts[v] - expected) / expected;
  CHECK(stat < 147.01);
}

TEST_CASE("parse the minimal instance") {
  const auto inst = parse_taillard("1 1\n0 7");
  CHECK(inst.num_jobs == 1);
  CHECK(inst.num_machines == 1);
  CHECK(inst.proc_times[0][0] == 7);
  CHECK(write_taillard(inst) == "1 1\n0 7\n");
}

TEST_CASE("parse skips comments and blank lines") {
  const auto inst = parse_taillard("# ft-like\n\n2 2\n# job 0\n0 3 1 2\n1 2   0 4\n");
  CHECK(inst.routing == std::vector<std::vector<int>>{{0, 1}, {1, 0}});
  CHECK(inst.proc_times == std::vector<std::vector<int>>{{3, 2}, {2, 4}});
  CHECK(write_taillard(inst) == "2 2\n0 3 1 2\n1 2 0 4\n");
}

TEST_CASE("parse errors name the offending line") {
  auto message = [](const char* text) {
    try {
      parse_taillard(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("1 1\n1 7\n").find("line 2") != std::string::npos);    // machine == num_machines
  CHECK(message("1 2\n0 3 0 4\n").find("line 2") != std::string::npos);  // duplicate machine
  CHECK(message("2 1\n0 3\n").find("line") != std::string::npos);        // missing job line
  CHECK(message("1 1\n0 x\n").find("line 2") != std::string::npos);
  CHECK(message("1 1\n0 0\n").find("line 2") != std::string::npos);  // zero processing time
  CHECK(message("").find("line 1") != std::string::npos);
}

TEST_CASE("write then parse is the identity on random instances") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const int jobs = static_cast<int>(rng.uniform_int(1, 12));
    const int machines = static_cast<int>(rng.uniform_int(1, 12));
    const auto inst = generate_instance(jobs, machines, rng.next_u64());
    const auto text = write_taillard(inst);
    CHECK(parse_taillard(text) == inst);
    CHECK(write_taillard(inst) == text);
  }
}
