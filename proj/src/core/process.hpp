#pragma once

#include <string>
#include <vector>

namespace declarui {

struct ProcessResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
  bool timed_out = false;
  bool spawn_failed = false;
  std::string spawn_error;
};

// Runs argv[0] with the given arguments in `workdir`, capturing combined
// output, killing the process after timeout_s seconds.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::string& workdir, int timeout_s);

}  // namespace declarui
