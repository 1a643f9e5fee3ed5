#ifndef JSSP_TOOLS_CLI_HPP
#define JSSP_TOOLS_CLI_HPP

// Command-line front end. Kept in a library so tests can drive it in-process.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace jssp::cli {

class CommandLine {
 public:
  CommandLine();
  ~CommandLine();

  CLI::App& app();

  // Parses and runs one invocation. Results go to `out`; the effective-config
  // banner, warnings and the one-line error report go to `err`. Exit codes:
  // 0 success, 1 runtime or data error, 2 usage or config error.
  int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CommandLine cl;
  return cl.run(args, out, err);
}

}  // namespace jssp::cli

#endif  // JSSP_TOOLS_CLI_HPP
