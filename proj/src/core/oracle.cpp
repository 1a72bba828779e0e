/*
 * Copyright 2026 The masala Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "core/oracle.hpp"

#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <utility>

#include <fcntl.h>
#include <poll.h>
#include <pthread.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "core/error.hpp"

extern char** environ;

namespace masala {
namespace {

std::vector<double> RowOf(const Eigen::MatrixXd& rows, Eigen::Index i) {
  std::vector<double> out(static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index m = 0; m < rows.cols(); ++m) {
    const double v = rows(i, m);
    out[static_cast<std::size_t>(m)] = v == 0.0 ? 0.0 : v;
  }
  return out;
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  ~Fd() { Reset(); }
  int get() const { return fd_; }
  void Reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

// Blocks SIGPIPE on this thread for the duration of a child conversation and
// drains any pending instance before restoring the mask.
class SigpipeGuard {
 public:
  SigpipeGuard() {
    sigemptyset(&pipe_set_);
    sigaddset(&pipe_set_, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &pipe_set_, &old_);
  }
  ~SigpipeGuard() {
    timespec zero{0, 0};
    while (sigtimedwait(&pipe_set_, nullptr, &zero) > 0) {
    }
    pthread_sigmask(SIG_SETMASK, &old_, nullptr);
  }

 private:
  sigset_t pipe_set_;
  sigset_t old_;
};

struct ChildResult {
  std::string output;
  int status = 0;
};

ChildResult RunChild(const std::string& command, const std::string& input,
                     std::chrono::milliseconds timeout) {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) Fail(ErrorCode::kOracle, "pipe failed");
  Fd in_read(in_pipe[0]), in_write(in_pipe[1]);
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) Fail(ErrorCode::kOracle, "pipe failed");
  Fd out_read(out_pipe[0]), out_write(out_pipe[1]);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_read.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_write.get(), STDOUT_FILENO);

  SigpipeGuard guard;
  std::string shell = "/bin/sh";
  std::string flag = "-c";
  std::string cmd = command;
  char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
  // Own process group, so a timeout kills the shell and everything it started.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    Fail(ErrorCode::kOracle, "cannot spawn oracle command '" + command + "': " + std::strerror(rc));
  }
  in_read.Reset();
  out_write.Reset();
  ::fcntl(in_write.get(), F_SETFL, O_NONBLOCK);

  ChildResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::size_t written = 0;
  if (input.empty()) in_write.Reset();
  bool timed_out = false;
  char buf[65536];
  while (out_read.get() >= 0) {
    pollfd fds[2];
    int nfds = 0;
    fds[nfds++] = {out_read.get(), POLLIN, 0};
    if (in_write.get() >= 0) fds[nfds++] = {in_write.get(), POLLOUT, 0};
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      timed_out = true;
      break;
    }
    const int ready = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) continue;
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t n = ::read(out_read.get(), buf, sizeof(buf));
      if (n > 0) {
        result.output.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        out_read.Reset();
      }
    }
    if (nfds > 1 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = ::write(in_write.get(), input.data() + written, input.size() - written);
      if (n > 0) written += static_cast<std::size_t>(n);
      if (n < 0 && errno != EAGAIN && errno != EINTR) {
        in_write.Reset();  // child closed its stdin
      } else if (written == input.size()) {
        in_write.Reset();
      }
    }
  }
  in_write.Reset();
  if (timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    Fail(ErrorCode::kOracle, "oracle command timed out after " +
                                 std::to_string(timeout.count()) + " ms: '" + command + "'");
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    Fail(ErrorCode::kOracle,
         "oracle command failed (" +
             (WIFEXITED(status) ? "exit status " + std::to_string(WEXITSTATUS(status))
                                : std::string("killed by signal")) +
             "): '" + command + "'");
  }
  result.status = status;
  return result;
}

}  // namespace

std::size_t PrecomputedColumn::RowHash::operator()(const std::vector<double>& row) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : row) {
    h ^= std::bit_cast<std::uint64_t>(v);
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

PrecomputedColumn::PrecomputedColumn(const Dataset& original_units) {
  const auto& preds = original_units.RequirePredictions();
  column_ = original_units.prediction_column.value_or("");
  for (std::size_t i = 0; i < original_units.rows(); ++i) {
    table_.emplace(RowOf(original_units.original_features, static_cast<Eigen::Index>(i)),
                   preds[i]);
  }
}

std::vector<double> PrecomputedColumn::Predict(const Eigen::MatrixXd& rows) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const auto it = table_.find(RowOf(rows, i));
    if (it == table_.end()) {
      Fail(ErrorCode::kOracle, "precomputed column '" + column_ +
                                   "' cannot answer query row " + std::to_string(i) +
                                   ": not a dataset row (a live oracle command is required)");
    }
    out.push_back(it->second);
  }
  return out;
}

ExternalCommand::ExternalCommand(std::string command, std::vector<std::string> feature_names,
                                 std::chrono::milliseconds timeout)
    : command_(std::move(command)), feature_names_(std::move(feature_names)), timeout_(timeout) {
  if (command_.empty()) Fail(ErrorCode::kInvalidArgument, "empty oracle command");
  if (timeout_.count() <= 0) Fail(ErrorCode::kInvalidArgument, "oracle timeout must be positive");
}

std::vector<double> ExternalCommand::Predict(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != feature_names_.size()) {
    Fail(ErrorCode::kInvalidArgument, "oracle query has wrong column count");
  }
  if (rows.rows() == 0) return {};
  const auto child = RunChild(command_, RowsToCsv(rows, feature_names_), timeout_);
  return ParsePredictionLines(child.output, static_cast<std::size_t>(rows.rows()));
}

std::string PredictionOracle::Describe() const {
  if (const auto* p = std::get_if<PrecomputedColumn>(&impl_)) {
    return "precomputed column '" + p->column() + "'";
  }
  return "command '" + std::get<ExternalCommand>(impl_).command() + "'";
}

std::vector<double> PredictionOracle::Predict(const Eigen::MatrixXd& rows) const {
  return std::visit([&](const auto& o) { return o.Predict(rows); }, impl_);
}

double PredictionOracle::PredictOne(std::span<const double> row) const {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(row.size()));
  for (std::size_t j = 0; j < row.size(); ++j) m(0, static_cast<Eigen::Index>(j)) = row[j];
  return Predict(m).front();
}

std::string RowsToCsv(const Eigen::MatrixXd& rows, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t m = 0; m < names.size(); ++m) {
    if (m) out += ',';
    out += names[m];
  }
  out += '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index m = 0; m < rows.cols(); ++m) {
      if (m) out += ',';
      std::snprintf(buf, sizeof(buf), "%.17g", rows(i, m));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<double> ParsePredictionLines(std::string_view output, std::size_t expected) {
  std::vector<double> values;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < output.size()) {
    auto nl = output.find('\n', start);
    if (nl == std::string_view::npos) nl = output.size();
    auto line = output.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    if (line.front() == '+') line.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size()) {
      Fail(ErrorCode::kOracle,
           "oracle output line " + std::to_string(line_no) + " is not a number: '" +
               std::string(line) + "'");
    }
    if (!std::isfinite(v)) {
      Fail(ErrorCode::kOracle, "oracle output line " + std::to_string(line_no) + " is not finite");
    }
    values.push_back(v);
  }
  if (values.size() != expected) {
    Fail(ErrorCode::kOracle, "oracle returned " + std::to_string(values.size()) +
                                 " predictions for " + std::to_string(expected) + " rows");
  }
  return values;
}

}  // namespace masala
