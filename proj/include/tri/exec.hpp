#pragma once

// Execution harness: runs candidates on argument tuples and maps every
// failure mode onto a special value.
//
//   worker answers "ok"              -> the decoded value
//   worker answers "invalid-input"   -> Undefined
//   anything else (error status, crash, timeout, malformed or oversized
//   response)                        -> Demonic
//
// One worker process is kept per (command, source, entrypoint) and reused
// across calls. Outcomes are memoised per (candidate id, args): the first
// observed output is the output.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tri/candidate.hpp"
#include "tri/error.hpp"
#include "tri/problem.hpp"
#include "tri/value.hpp"
#include "tri/wire.hpp"

namespace tri {

using Millis = std::chrono::milliseconds;

struct ExecutionConfig {
  Millis timeout{10000};
  std::size_t maxOutputBytes = 1 << 20;
  std::size_t workerPoolSize = 4;

  void validate() const {
    if (timeout.count() <= 0) throw ContractViolation("timeout must be positive");
    if (maxOutputBytes == 0) throw ContractViolation("maxOutputBytes must be positive");
    if (workerPoolSize == 0) throw ContractViolation("workerPoolSize must be positive");
  }
};

struct ExecutionOutcome {
  Value value;
  std::chrono::nanoseconds elapsed{0};
  std::optional<std::string> raw;
};

/// Environment variable overriding the worker launch command.
inline constexpr const char* kWorkerCmdEnv = "TRI_WORKER_CMD";

inline std::vector<std::string> split_command(const std::string& cmd) {
  std::istringstream in(cmd);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

// ---------------------------------------------------------------------------

/// A child process speaking the line protocol on its standard streams.
class WorkerProcess {
 public:
  enum class Status { Ok, Timeout, Died, Oversized };

  struct Reply {
    Status status;
    std::string line;
  };

  explicit WorkerProcess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw ContractViolation("empty worker command");
    int toChild[2];
    int fromChild[2];
    if (::pipe2(toChild, O_CLOEXEC) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
    if (::pipe2(fromChild, O_CLOEXEC) != 0) {
      ::close(toChild[0]);
      ::close(toChild[1]);
      throw Error(std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::setpgid(0, 0);
      ::dup2(toChild[0], STDIN_FILENO);
      ::dup2(fromChild[1], STDOUT_FILENO);
      int devnull = ::open("/dev/null", O_WRONLY);
      if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
      ::execvp(cargv[0], cargv.data());
      ::_exit(127);
    }
    ::setpgid(pid_, pid_);
    ::close(toChild[0]);
    ::close(fromChild[1]);
    in_ = toChild[1];
    out_ = fromChild[0];
    ::fcntl(out_, F_SETFL, ::fcntl(out_, F_GETFL) | O_NONBLOCK);
    ::fcntl(in_, F_SETFL, ::fcntl(in_, F_GETFL) | O_NONBLOCK);
  }

  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  ~WorkerProcess() { terminate(); }

  bool alive() const { return !dead_; }

  /// Sends one frame and waits for one response line within `timeout`.
  Reply roundtrip(const std::string& frame, Millis timeout, std::size_t maxBytes) {
    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + timeout;
    auto remaining_ms = [&] {
      auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now()).count();
      return static_cast<int>(std::max<long long>(left, 0));
    };
    if (dead_) return {Status::Died, {}};

    std::string out = frame + "\n";
    std::size_t written = 0;
    while (written < out.size()) {
      ssize_t n = ::write(in_, out.data() + written, out.size() - written);
      if (n > 0) {
        written += static_cast<std::size_t>(n);
        continue;
      }
      if (n < 0 && errno == EAGAIN) {
        pollfd p{in_, POLLOUT, 0};
        int left = remaining_ms();
        if (left == 0 || ::poll(&p, 1, left) == 0) return {Status::Timeout, {}};
        continue;
      }
      if (n < 0 && errno == EINTR) continue;
      dead_ = true;
      return {Status::Died, {}};
    }

    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (line.size() > maxBytes) return {Status::Oversized, {}};
        return {Status::Ok, std::move(line)};
      }
      if (buffer_.size() > maxBytes) return {Status::Oversized, {}};
      char chunk[8192];
      ssize_t n = ::read(out_, chunk, sizeof chunk);
      if (n > 0) {
        buffer_.append(chunk, static_cast<std::size_t>(n));
        continue;
      }
      if (n == 0) {
        dead_ = true;
        return {Status::Died, {}};
      }
      if (errno == EINTR) continue;
      if (errno != EAGAIN) {
        dead_ = true;
        return {Status::Died, {}};
      }
      pollfd p{out_, POLLIN, 0};
      int left = remaining_ms();
      if (left == 0) return {Status::Timeout, {}};
      int r = ::poll(&p, 1, left);
      if (r == 0) return {Status::Timeout, {}};
    }
  }

  void terminate() {
    if (in_ >= 0) ::close(in_);
    if (out_ >= 0) ::close(out_);
    in_ = out_ = -1;
    if (pid_ > 0) {
      ::kill(-pid_, SIGKILL);
      ::kill(pid_, SIGKILL);
      int status = 0;
      while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
      pid_ = -1;
    }
    dead_ = true;
  }

 private:
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  bool dead_ = false;
  std::string buffer_;
};

// ---------------------------------------------------------------------------

class Executor {
 public:
  explicit Executor(ExecutionConfig cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    static const bool sigpipeIgnored = [] {
      ::signal(SIGPIPE, SIG_IGN);
      return true;
    }();
    (void)sigpipeIgnored;
  }

  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  const ExecutionConfig& config() const { return cfg_; }

  /// Runs `candidate` on `args`. Missing fixture keys throw FixtureIncomplete.
  ExecutionOutcome execute(const CandidateProgram& candidate, const std::vector<Value>& args) {
    return execute_impl(candidate, args, /*batchAbort=*/nullptr);
  }

  /// Positionally aligned outcomes. A worker that dies turns every remaining
  /// input of this batch into Demonic without being restarted.
  std::vector<ExecutionOutcome> execute_batch(const CandidateProgram& candidate, const TestInputSet& inputs) {
    std::vector<ExecutionOutcome> out;
    out.reserve(inputs.size());
    bool died = false;
    for (const auto& args : inputs.inputs()) out.push_back(execute_impl(candidate, args, &died));
    return out;
  }

  /// Batches for several candidates, run concurrently up to workerPoolSize.
  std::vector<std::vector<ExecutionOutcome>> execute_all(const std::vector<CandidateProgram>& candidates,
                                                         const TestInputSet& inputs) {
    std::vector<std::vector<ExecutionOutcome>> results(candidates.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failureMu;
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < candidates.size();) {
        try {
          results[i] = execute_batch(candidates[i], inputs);
        } catch (...) {
          std::lock_guard lock(failureMu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const std::size_t threads = std::min(cfg_.workerPoolSize, candidates.size());
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
  }

  /// Callback for derived candidates.
  Invoke invoker() {
    return [this](const CandidateProgram& c, const std::vector<Value>& args) { return execute(c, args).value; };
  }

  std::size_t worker_launches() const { return launches_.load(); }

 private:
  struct WorkerSlot {
    std::mutex mu;
    std::unique_ptr<WorkerProcess> proc;
    std::uint64_t nextId = 1;
  };

  static std::string memo_key(const CandidateProgram& c, const std::vector<Value>& args) {
    return c.id() + '\x1f' + args_key(args);
  }

  ExecutionOutcome execute_impl(const CandidateProgram& candidate, const std::vector<Value>& args, bool* batchDied) {
    for (const auto& a : args) {
      if (a.is_special()) throw ContractViolation("execute: special value in arguments");
    }
    if (candidate.is_fixture()) {
      auto key = args_key(args);
      const auto& entries = candidate.table().entries;
      auto it = entries.find(key);
      if (it == entries.end()) {
        throw FixtureIncomplete("fixture '" + candidate.id() + "' has no entry for " +
                                to_display(Value::tuple(args)));
      }
      return {it->second, {}, std::nullopt};
    }

    const auto key = memo_key(candidate, args);
    {
      std::lock_guard lock(memoMu_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }

    ExecutionOutcome outcome;
    if (candidate.is_derived()) {
      auto start = std::chrono::steady_clock::now();
      try {
        outcome.value = candidate.derived_program().fn(args, invoker());
      } catch (const FixtureIncomplete&) {
        throw;
      } catch (const std::exception& e) {
        outcome.value = Value::demonic();
        outcome.raw = e.what();
      }
      outcome.elapsed = std::chrono::steady_clock::now() - start;
    } else if (batchDied && *batchDied) {
      outcome.value = Value::demonic();
      outcome.raw = "worker died earlier in this batch";
    } else {
      outcome = run_worker(candidate.endpoint(), args, batchDied);
    }

    std::lock_guard lock(memoMu_);
    return memo_.try_emplace(key, std::move(outcome)).first->second;
  }

  std::vector<std::string> launch_command(const RunnerEndpoint& ep) const {
    std::vector<std::string> argv = ep.command;
    if (const char* env = std::getenv(kWorkerCmdEnv); env && *env) argv = split_command(env);
    argv.push_back(ep.sourcePath);
    argv.push_back(ep.entrypoint);
    return argv;
  }

  WorkerSlot& slot_for(const std::vector<std::string>& argv) {
    std::string key;
    for (const auto& a : argv) key += a + '\x1f';
    std::lock_guard lock(slotsMu_);
    auto& s = slots_[key];
    if (!s) s = std::make_unique<WorkerSlot>();
    return *s;
  }

  ExecutionOutcome run_worker(const RunnerEndpoint& ep, const std::vector<Value>& args, bool* batchDied) {
    const auto argv = launch_command(ep);
    WorkerSlot& slot = slot_for(argv);
    std::lock_guard lock(slot.mu);
    const auto start = std::chrono::steady_clock::now();
    ExecutionOutcome outcome{Value::demonic(), {}, std::nullopt};

    if (!slot.proc || !slot.proc->alive()) {
      slot.proc = std::make_unique<WorkerProcess>(argv);
      ++launches_;
    }
    const std::string id = std::to_string(slot.nextId++);
    auto reply = slot.proc->roundtrip(encode_call_frame(id, args), cfg_.timeout, cfg_.maxOutputBytes);
    switch (reply.status) {
      case WorkerProcess::Status::Ok:
        try {
          auto frame = decode_response_frame(reply.line);
          if (frame.id != id) throw FormatError("response id '" + frame.id + "' does not match '" + id + "'");
          outcome.value = std::move(frame.value);
          outcome.raw = std::move(frame.message);
        } catch (const FormatError& e) {
          outcome.raw = e.what();
          slot.proc.reset();  // stream state unknown
        }
        break;
      case WorkerProcess::Status::Timeout:
        outcome.raw = "timeout";
        slot.proc.reset();
        break;
      case WorkerProcess::Status::Oversized:
        outcome.raw = "response exceeds output cap";
        slot.proc.reset();
        break;
      case WorkerProcess::Status::Died:
        outcome.raw = "worker exited";
        slot.proc.reset();
        if (batchDied) *batchDied = true;
        break;
    }
    outcome.elapsed = std::chrono::steady_clock::now() - start;
    return outcome;
  }

  ExecutionConfig cfg_;
  std::mutex memoMu_;
  std::unordered_map<std::string, ExecutionOutcome> memo_;
  std::mutex slotsMu_;
  std::map<std::string, std::unique_ptr<WorkerSlot>> slots_;
  std::atomic<std::size_t> launches_{0};
};

/// One-shot convenience wrappers over a private Executor.
inline ExecutionOutcome execute(const CandidateProgram& candidate, const std::vector<Value>& args,
                                const ExecutionConfig& cfg) {
  Executor ex(cfg);
  return ex.execute(candidate, args);
}

inline std::vector<ExecutionOutcome> execute_batch(const CandidateProgram& candidate, const TestInputSet& inputs,
                                                   const ExecutionConfig& cfg) {
  Executor ex(cfg);
  return ex.execute_batch(candidate, inputs);
}

}  // namespace tri
