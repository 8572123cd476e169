#include "process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace declarui {

ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::string& workdir, int timeout_s) {
  ProcessResult result;
  if (argv.empty()) {
    result.spawn_failed = true;
    result.spawn_error = "empty command";
    return result;
  }

  int pipefd[2];
  if (pipe(pipefd) != 0) {
    result.spawn_failed = true;
    result.spawn_error = std::strerror(errno);
    return result;
  }

  pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    result.spawn_failed = true;
    result.spawn_error = std::strerror(errno);
    return result;
  }

  if (pid == 0) {
    close(pipefd[0]);
    dup2(pipefd[1], STDOUT_FILENO);
    dup2(pipefd[1], STDERR_FILENO);
    close(pipefd[1]);
    if (!workdir.empty() && chdir(workdir.c_str()) != 0) {
      _exit(127);
    }
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& arg : argv) {
      args.push_back(const_cast<char*>(arg.c_str()));
    }
    args.push_back(nullptr);
    execvp(args[0], args.data());
    // exec failed; 127 mirrors shell behavior for command-not-found.
    _exit(127);
  }

  close(pipefd[1]);
  fcntl(pipefd[0], F_SETFL, O_NONBLOCK);

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::seconds(timeout_s);
  bool open = true;
  while (open) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                         deadline - std::chrono::steady_clock::now())
                         .count();
    if (remaining <= 0) {
      kill(pid, SIGKILL);
      result.timed_out = true;
      remaining = 100;
    }
    struct pollfd pfd = {pipefd[0], POLLIN, 0};
    int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 250)));
    if (ready > 0) {
      char buf[4096];
      ssize_t n;
      while ((n = read(pipefd[0], buf, sizeof(buf))) > 0) {
        result.output.append(buf, static_cast<size_t>(n));
      }
      if (n == 0) {
        open = false;
      }
    } else if (ready == 0 && result.timed_out) {
      open = false;
    }
  }
  close(pipefd[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  if (result.exit_code == 127) {
    result.spawn_failed = true;
    result.spawn_error = "command not found or not executable: " + argv[0];
  }
  return result;
}

}  // namespace declarui
