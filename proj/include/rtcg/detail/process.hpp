// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_DETAIL_PROCESS_HPP
#define RTCG_DETAIL_PROCESS_HPP

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <vector>

#include "rtcg/error.hpp"

extern char **environ;

namespace rtcg::detail {

struct ProcessResult {
  int exit_code = -1; // -1 if killed by a signal
  bool timed_out = false;
  std::string out;
  std::string err;
};

namespace process_detail {

class Fd {
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd &) = delete;
  Fd &operator=(const Fd &) = delete;
  Fd(Fd &&o) noexcept : fd_(o.release()) {}
  Fd &operator=(Fd &&o) noexcept {
    reset(o.release());
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  int release() {
    int f = fd_;
    fd_ = -1;
    return f;
  }
  void reset(int f = -1) {
    if (fd_ >= 0)
      ::close(fd_);
    fd_ = f;
  }

private:
  int fd_ = -1;
};

inline void make_pipe(Fd &r, Fd &w) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0)
    throw Error(std::string("pipe: ") + std::strerror(errno));
  r.reset(fds[0]);
  w.reset(fds[1]);
}

} // namespace process_detail

/// Runs `argv` (argv[0] looked up on PATH) with stdin closed, capturing
/// stdout and stderr. The child is killed with SIGKILL after `timeout`.
inline ProcessResult run_process(const std::vector<std::string> &argv,
                                 std::chrono::milliseconds timeout) {
  using process_detail::Fd;
  if (argv.empty())
    throw Error("run_process: empty argv");

  Fd out_r, out_w, err_r, err_w;
  process_detail::make_pipe(out_r, out_w);
  process_detail::make_pipe(err_r, err_w);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, out_w.get(), 1);
  posix_spawn_file_actions_adddup2(&actions, err_w.get(), 2);

  std::vector<char *> cargv;
  for (const auto &a : argv)
    cargv.push_back(const_cast<char *>(a.c_str()));
  cargv.push_back(nullptr);

  pid_t pid = 0;
  const int rc = ::posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0)
    throw Error("cannot spawn '" + argv[0] + "': " + std::strerror(rc));
  out_w.reset();
  err_w.reset();

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  bool out_open = true, err_open = true;
  char buf[4096];
  while (out_open || err_open) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      ::kill(pid, SIGKILL);
      break;
    }
    pollfd fds[2] = {{out_open ? out_r.get() : -1, POLLIN, 0},
                     {err_open ? err_r.get() : -1, POLLIN, 0}};
    const int n = ::poll(fds, 2, static_cast<int>(left.count()));
    if (n < 0) {
      if (errno == EINTR)
        continue;
      ::kill(pid, SIGKILL);
      break;
    }
    for (int k = 0; k < 2; ++k) {
      if (fds[k].fd < 0 || !(fds[k].revents & (POLLIN | POLLHUP | POLLERR)))
        continue;
      const auto got = ::read(fds[k].fd, buf, sizeof buf);
      if (got > 0)
        (k == 0 ? result.out : result.err).append(buf, static_cast<std::size_t>(got));
      else if (got == 0 || errno != EINTR)
        (k == 0 ? out_open : err_open) = false;
    }
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

} // namespace rtcg::detail

#endif // RTCG_DETAIL_PROCESS_HPP
