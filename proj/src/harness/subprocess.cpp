#include "tdrepair/harness/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <thread>
#include <utility>

#include "tdrepair/errors.hpp"

namespace tdrepair::harness {
namespace {

using Clock = std::chrono::steady_clock;

constexpr rlim_t kFileSizeLimit = 64u << 20;
constexpr rlim_t kOpenFilesLimit = 64;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  bool open() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read, write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw InfrastructureError(InfrastructureError::Kind::kSpawnFailure,
                              std::string("pipe2 failed: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

void set_nonblocking(int fd) {
  ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
}

// Only async-signal-safe calls from here until execve.
void write_all_raw(const char* path, const char* data) {
  const int fd = ::open(path, O_WRONLY | O_CLOEXEC);
  if (fd < 0) return;
  const ssize_t unused = ::write(fd, data, std::strlen(data));
  (void)unused;
  ::close(fd);
}

void set_limit(int resource, rlim_t value) {
  struct rlimit rl {value, value};
  ::setrlimit(resource, &rl);
}

[[noreturn]] void child_fail(int err_fd) {
  const int e = errno;
  const ssize_t unused = ::write(err_fd, &e, sizeof e);
  (void)unused;
  ::_exit(127);
}

bool exited_nowait(pid_t pid) {
  siginfo_t info{};
  if (::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOHANG | WNOWAIT) != 0) return false;
  return info.si_pid == pid;
}

}  // namespace

std::filesystem::path resolve_executable(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos) return name;
  const char* path_env = std::getenv("PATH");
  if (!path_env) return name;
  std::string_view rest(path_env);
  while (!rest.empty()) {
    const auto colon = rest.find(':');
    const std::string_view dir = rest.substr(0, colon);
    rest = colon == std::string_view::npos ? std::string_view{} : rest.substr(colon + 1);
    if (dir.empty()) continue;
    const std::filesystem::path candidate = std::filesystem::path(dir) / name;
    std::error_code ec;
    if (std::filesystem::is_regular_file(candidate, ec) && ::access(candidate.c_str(), X_OK) == 0) return candidate;
  }
  return name;
}

SpawnResult run_confined(const SpawnOptions& opts) {
  ignore_sigpipe();

  std::vector<std::string> argv_store;
  argv_store.push_back(opts.executable.string());
  argv_store.insert(argv_store.end(), opts.args.begin(), opts.args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  const std::string wd = opts.workdir.string();
  std::vector<std::string> env_store = {"PATH=/usr/local/bin:/usr/bin:/bin",
                                        "HOME=" + wd,
                                        "TMPDIR=" + wd,
                                        "LANG=C.UTF-8",
                                        "PYTHONDONTWRITEBYTECODE=1",
                                        "PYTHONIOENCODING=utf-8",
                                        "PYTHONHASHSEED=0"};
  std::vector<char*> envp;
  for (auto& e : env_store) envp.push_back(e.data());
  envp.push_back(nullptr);

  const std::string uid_map = std::to_string(::getuid()) + " " + std::to_string(::getuid()) + " 1";
  const std::string gid_map = std::to_string(::getgid()) + " " + std::to_string(::getgid()) + " 1";
  const rlim_t memory = static_cast<rlim_t>(opts.memory_limit_mib) << 20;
  const rlim_t cpu_seconds = static_cast<rlim_t>(opts.deadline.count() / 1000 + 2);

  Pipe in = make_pipe(), out = make_pipe(), err = make_pipe(), status = make_pipe();
  const auto start = Clock::now();

  const pid_t pid = ::fork();
  if (pid < 0) {
    throw InfrastructureError(InfrastructureError::Kind::kSpawnFailure,
                              std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    const int status_fd = status.write.get();
    ::setpgid(0, 0);
    // A user namespace drops privileged file access, so only unprivileged
    // callers pay for one.
    if (opts.isolate_network && ::unshare(CLONE_NEWNET) != 0 && ::unshare(CLONE_NEWUSER | CLONE_NEWNET) == 0) {
      write_all_raw("/proc/self/setgroups", "deny");
      write_all_raw("/proc/self/uid_map", uid_map.c_str());
      write_all_raw("/proc/self/gid_map", gid_map.c_str());
    }
    if (::chdir(wd.c_str()) != 0) child_fail(status_fd);
    set_limit(RLIMIT_AS, memory);
    set_limit(RLIMIT_CPU, cpu_seconds);
    set_limit(RLIMIT_FSIZE, kFileSizeLimit);
    set_limit(RLIMIT_NOFILE, kOpenFilesLimit);
    set_limit(RLIMIT_CORE, 0);
    if (::dup2(in.read.get(), 0) < 0 || ::dup2(out.write.get(), 1) < 0 || ::dup2(err.write.get(), 2) < 0) {
      child_fail(status_fd);
    }
#ifdef SYS_close_range
    ::syscall(SYS_close_range, 3u, ~0u, 4u /* CLOSE_RANGE_CLOEXEC */);
#endif
    ::execve(argv[0], argv.data(), envp.data());
    child_fail(status_fd);
  }

  in.read.reset();
  out.write.reset();
  err.write.reset();
  status.write.reset();

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(status.read.get(), &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  if (n == static_cast<ssize_t>(sizeof child_errno)) {
    ::waitpid(pid, nullptr, 0);
    throw InfrastructureError(InfrastructureError::Kind::kSpawnFailure,
                              "cannot start runner " + opts.executable.string() + ": " + std::strerror(child_errno));
  }

  SpawnResult result;
  const auto deadline = start + opts.deadline;
  std::size_t written = 0;
  if (opts.stdin_data.empty()) in.write.reset();
  for (Fd* fd : {&in.write, &out.read, &err.read}) {
    if (fd->open()) set_nonblocking(fd->get());
  }

  bool leader_exited = false;
  char buf[65536];
  auto drain = [&](Fd& fd, std::string& sink, bool* truncated) {
    for (;;) {
      const ssize_t r = ::read(fd.get(), buf, sizeof buf);
      if (r > 0) {
        const std::size_t room = opts.output_cap > sink.size() ? opts.output_cap - sink.size() : 0;
        sink.append(buf, std::min<std::size_t>(room, static_cast<std::size_t>(r)));
        if (static_cast<std::size_t>(r) > room && truncated) *truncated = true;
        continue;
      }
      if (r == 0) fd.reset();
      if (r < 0 && errno == EINTR) continue;
      return;
    }
  };

  while (out.read.open() || err.read.open()) {
    const auto now = Clock::now();
    if (now >= deadline) {
      result.deadline_hit = true;
      break;
    }
    if (!leader_exited && exited_nowait(pid)) {
      // Stragglers could hold the pipes open forever.
      leader_exited = true;
      ::kill(-pid, SIGKILL);
    }
    pollfd fds[3];
    nfds_t count = 0;
    if (in.write.open()) fds[count++] = {in.write.get(), POLLOUT, 0};
    if (out.read.open()) fds[count++] = {out.read.get(), POLLIN, 0};
    if (err.read.open()) fds[count++] = {err.read.get(), POLLIN, 0};
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int timeout = static_cast<int>(std::min<long long>(remaining + 1, leader_exited ? 1000 : 100));
    const int ready = ::poll(fds, count, timeout);
    if (ready < 0 && errno != EINTR) break;
    if (ready <= 0) continue;
    for (nfds_t i = 0; i < count; ++i) {
      if (fds[i].revents == 0) continue;
      if (fds[i].fd == in.write.get()) {
        const ssize_t w = ::write(in.write.get(), opts.stdin_data.data() + written, opts.stdin_data.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if ((w < 0 && errno != EAGAIN && errno != EINTR) || written == opts.stdin_data.size()) in.write.reset();
      } else if (fds[i].fd == out.read.get()) {
        drain(out.read, result.out, &result.stdout_truncated);
      } else if (fds[i].fd == err.read.get()) {
        drain(err.read, result.err, nullptr);
      }
    }
  }
  in.write.reset();

  while (!result.deadline_hit && !exited_nowait(pid)) {
    if (Clock::now() >= deadline) {
      result.deadline_hit = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  // The zombie leader keeps the group id reserved until reaped.
  ::kill(-pid, SIGKILL);
  int wstatus = 0;
  while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
  }
  result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  if (WIFSIGNALED(wstatus)) {
    result.signaled = true;
    result.term_signal = WTERMSIG(wstatus);
  } else if (WIFEXITED(wstatus)) {
    result.exit_code = WEXITSTATUS(wstatus);
  }
  if (result.deadline_hit) {
    result.signaled = true;
    result.term_signal = SIGKILL;
  }
  return result;
}

}  // namespace tdrepair::harness
