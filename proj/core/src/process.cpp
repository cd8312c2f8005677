#include "process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>

namespace specfault::detail {

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(other.release()) {}
  Fd& operator=(Fd&& other) noexcept {
    reset(other.release());
    return *this;
  }
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  int release() noexcept { return std::exchange(fd_, -1); }
  void reset(int fd = -1) noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }

 private:
  int fd_ = -1;
};

bool make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) return false;
  read_end.reset(fds[0]);
  write_end.reset(fds[1]);
  return true;
}

std::string env_lookup(const std::vector<std::string>& env, const std::string& key) {
  for (const auto& kv : env) {
    if (kv.size() > key.size() && kv.compare(0, key.size(), key) == 0 &&
        kv[key.size()] == '=') {
      return kv.substr(key.size() + 1);
    }
  }
  return {};
}

std::string resolve_executable(const std::string& name, const std::vector<std::string>& env) {
  if (name.find('/') != std::string::npos) return name;
  std::stringstream path(env_lookup(env, "PATH"));
  std::string dir;
  while (std::getline(path, dir, ':')) {
    if (dir.empty()) dir = ".";
    std::string candidate = dir + "/" + name;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate;
  }
  return name;
}

/// Appends what is readable now; returns false once the pipe hit EOF.
bool drain(Fd& fd, std::string& sink, std::size_t limit) {
  char buf[8192];
  while (true) {
    ssize_t n = ::read(fd.get(), buf, sizeof buf);
    if (n > 0) {
      std::size_t room = sink.size() < limit ? limit - sink.size() : 0;
      sink.append(buf, std::min<std::size_t>(room, static_cast<std::size_t>(n)));
      continue;
    }
    if (n == 0) {
      fd.reset();
      return false;
    }
    if (errno == EINTR) continue;
    return errno == EAGAIN || errno == EWOULDBLOCK;
  }
}

bool has_shell_syntax(const std::string& text) {
  return text.find_first_of("|&;<>()$`\\\"'*?[]#~\n") != std::string::npos;
}

std::string shell_quote(const std::string& value) {
  std::string out = "'";
  for (char ch : value) {
    if (ch == '\'') {
      out += "'\\''";
    } else {
      out += ch;
    }
  }
  out += "'";
  return out;
}

}  // namespace

std::string expand_placeholders(const std::string& text,
                                const std::map<std::string, std::string>& values,
                                bool quote) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find('{', pos);
    if (open == std::string::npos) break;
    auto close = text.find('}', open);
    if (close == std::string::npos) break;
    auto it = values.find(text.substr(open + 1, close - open - 1));
    out.append(text, pos, open - pos);
    if (it == values.end()) {
      out.append(text, open, close - open + 1);
    } else {
      out += quote ? shell_quote(it->second) : it->second;
    }
    pos = close + 1;
  }
  out.append(text, pos);
  return out;
}

std::vector<std::string> command_argv(const std::string& command_template,
                                      const std::map<std::string, std::string>& values) {
  if (has_shell_syntax(command_template)) {
    return {"/bin/sh", "-c", expand_placeholders(command_template, values, true)};
  }
  std::vector<std::string> argv;
  std::istringstream words(command_template);
  std::string word;
  while (words >> word) argv.push_back(expand_placeholders(word, values));
  return argv;
}

ProcessResult run_process(const ProcessSpec& spec) {
  ProcessResult result;
  if (spec.argv.empty()) {
    result.spawn_failed = true;
    result.err = "empty command";
    return result;
  }

  std::string exe = resolve_executable(spec.argv[0], spec.env);
  std::vector<char*> argv;
  for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  std::vector<char*> envp;
  for (const auto& e : spec.env) envp.push_back(const_cast<char*>(e.c_str()));
  envp.push_back(nullptr);
  std::string cwd = spec.working_dir.string();

  Fd out_r, out_w, err_r, err_w, status_r, status_w;
  Fd devnull(::open("/dev/null", O_RDWR | O_CLOEXEC));
  if (!devnull || !make_pipe(err_r, err_w) || !make_pipe(status_r, status_w) ||
      (spec.capture_stdout && !make_pipe(out_r, out_w))) {
    result.spawn_failed = true;
    result.err = std::string("pipe setup failed: ") + std::strerror(errno);
    return result;
  }

  auto started = Clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    result.spawn_failed = true;
    result.err = std::string("fork failed: ") + std::strerror(errno);
    return result;
  }
  if (pid == 0) {
    // Child: only async-signal-safe calls from here on.
    ::setpgid(0, 0);
    sigset_t none;
    sigemptyset(&none);
    ::sigprocmask(SIG_SETMASK, &none, nullptr);
    int code = 0;
    if (::chdir(cwd.c_str()) != 0 || ::dup2(devnull.get(), 0) < 0 ||
        ::dup2(spec.capture_stdout ? out_w.get() : devnull.get(), 1) < 0 ||
        ::dup2(err_w.get(), 2) < 0) {
      code = errno;
    } else {
      ::execve(exe.c_str(), argv.data(), envp.data());
      code = errno;
    }
    [[maybe_unused]] auto n = ::write(status_w.get(), &code, sizeof code);
    ::_exit(127);
  }

  ::setpgid(pid, pid);
  out_w.reset();
  err_w.reset();
  status_w.reset();

  int exec_errno = 0;
  ssize_t got;
  do {
    got = ::read(status_r.get(), &exec_errno, sizeof exec_errno);
  } while (got < 0 && errno == EINTR);
  if (got == static_cast<ssize_t>(sizeof exec_errno)) {
    result.spawn_failed = true;
    result.err = "cannot execute " + spec.argv[0] + ": " + std::strerror(exec_errno);
  }

  for (Fd* fd : {&out_r, &err_r}) {
    if (*fd) ::fcntl(fd->get(), F_SETFL, ::fcntl(fd->get(), F_GETFL) | O_NONBLOCK);
  }

  auto deadline = started + spec.timeout;
  Clock::time_point kill_at{};
  bool killed = false;
  int status = 0;
  while (true) {
    pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;

    auto now = Clock::now();
    if (!result.timed_out && now >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGTERM);
      kill_at = now + spec.kill_grace;
    }
    if (result.timed_out && !killed && now >= kill_at) {
      ::kill(-pid, SIGKILL);
      killed = true;
    }

    std::vector<pollfd> fds;
    if (out_r) fds.push_back({out_r.get(), POLLIN, 0});
    if (err_r) fds.push_back({err_r.get(), POLLIN, 0});
    ::poll(fds.data(), fds.size(), 20);
    if (out_r) drain(out_r, result.out, spec.output_limit);
    if (err_r) drain(err_r, result.err, spec.output_limit);
  }
  if (out_r) drain(out_r, result.out, spec.output_limit);
  if (err_r) drain(err_r, result.err, spec.output_limit);
  if (result.timed_out) ::kill(-pid, SIGKILL);

  result.wall = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.term_signal = WTERMSIG(status);
  }
  return result;
}

}  // namespace specfault::detail
