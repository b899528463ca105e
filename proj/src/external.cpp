#include "lexent/external.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "lexent/error.hpp"

namespace lexent::scorer {

namespace {

bool looks_like_host_port(std::string_view s) {
  const auto colon = s.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 >= s.size()) return false;
  for (std::size_t i = colon + 1; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  for (std::size_t i = 0; i < colon; ++i) {
    const char c = s[i];
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      const ssize_t m = ::write(fd, data.data(), data.size());
      if (m < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      data.remove_prefix(static_cast<std::size_t>(m));
      continue;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

Endpoint Endpoint::parse(std::string_view spec) {
  Endpoint e;
  std::string_view s = spec;
  if (s.rfind("tcp://", 0) == 0) {
    s.remove_prefix(6);
    if (!looks_like_host_port(s)) throw UsageError("bad TCP endpoint '" + std::string(spec) + "' (want host:port)");
  } else if (s.rfind("exec:", 0) == 0) {
    s.remove_prefix(5);
    if (s.empty()) throw UsageError("empty scorer command");
    e.kind = Kind::process;
    e.command = std::string(s);
    return e;
  } else if (!looks_like_host_port(s)) {
    if (s.empty()) throw UsageError("empty scorer endpoint");
    e.kind = Kind::process;
    e.command = std::string(s);
    return e;
  }
  const auto colon = s.rfind(':');
  const unsigned long port = std::stoul(std::string(s.substr(colon + 1)));
  if (port == 0 || port > 65535) throw UsageError("bad TCP port in '" + std::string(spec) + "'");
  e.kind = Kind::tcp;
  e.host = std::string(s.substr(0, colon));
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

ExternalScorer::ExternalScorer(Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  // Writes to a dead peer must surface as errors, not kill the process.
  ::signal(SIGPIPE, SIG_IGN);
  connect();
}

ExternalScorer::~ExternalScorer() { close_connection(); }

void ExternalScorer::connect() {
  if (endpoint_.kind == Endpoint::Kind::tcp) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(endpoint_.port);
    if (const int rc = ::getaddrinfo(endpoint_.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
      throw DataError("cannot resolve scorer host '" + endpoint_.host + "': " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
      throw DataError("cannot connect to scorer at " + endpoint_.host + ":" + port + ": " + std::strerror(errno));
    }
    read_fd_ = fd;
    write_fd_ = fd;
    return;
  }

  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw DataError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw DataError(std::string("pipe: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    throw DataError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::signal(SIGPIPE, SIG_DFL);
    ::execl("/bin/sh", "sh", "-c", endpoint_.command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(to_child[0]);
  ::close(from_child[1]);
  write_fd_ = to_child[1];
  read_fd_ = from_child[0];
  child_pid_ = pid;
}

void ExternalScorer::close_connection() {
  if (endpoint_.kind == Endpoint::Kind::tcp) {
    if (read_fd_ >= 0) ::close(read_fd_);
  } else {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
  }
  read_fd_ = write_fd_ = -1;
  if (child_pid_ > 0) {
    int status = 0;
    // Give the child a moment to exit on EOF, then make sure it is gone.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(child_pid_, &status, WNOHANG) == child_pid_) {
        child_pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(-child_pid_, SIGKILL);
    ::waitpid(child_pid_, &status, 0);
    child_pid_ = -1;
  }
}

std::vector<double> ExternalScorer::score(const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::lock_guard lock(mutex_);
  if (broken_) throw DataError("external scorer connection was closed after an earlier error");
  if (pairs.empty()) return {};

  const std::string prefix = std::to_string(next_call_++) + "-";
  std::string payload;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    nlohmann::json req{{"id", prefix + std::to_string(i)}, {"text_a", pairs[i].first}, {"text_b", pairs[i].second}};
    payload += req.dump();
    payload += '\n';
  }

  bool write_ok = true;
  std::thread writer([&] { write_ok = write_all(write_fd_, payload); });

  auto fail = [&](const std::string& msg) -> DataError {
    broken_ = true;
    // Unblock the writer: shut the socket down or kill the child.
    if (endpoint_.kind == Endpoint::Kind::tcp) {
      ::shutdown(write_fd_, SHUT_RDWR);
    } else if (child_pid_ > 0) {
      ::kill(-child_pid_, SIGKILL);
    }
    writer.join();
    close_connection();
    return DataError("external scorer: " + msg);
  };

  std::unordered_map<std::string, std::size_t> pending;
  pending.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) pending.emplace(prefix + std::to_string(i), i);
  std::vector<double> scores(pairs.size(), 0.0);

  char chunk[65536];
  while (!pending.empty()) {
    std::size_t nl;
    while ((nl = buffer_.find('\n')) == std::string::npos) {
      pollfd pfd{read_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(timeout_.count()));
      if (rc == 0) throw fail("timed out waiting for responses");
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw fail(std::string("poll: ") + std::strerror(errno));
      }
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw fail(std::string("read: ") + std::strerror(errno));
      }
      if (n == 0) throw fail("stream closed with " + std::to_string(pending.size()) + " responses outstanding");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
    std::string line = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    nlohmann::json resp;
    try {
      resp = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw fail("malformed response line: " + line.substr(0, 200));
    }
    if (!resp.is_object() || !resp.contains("id") || !resp["id"].is_string()) throw fail("response without an id: " + line.substr(0, 200));
    const auto id = resp["id"].get<std::string>();
    const auto it = pending.find(id);
    if (it == pending.end()) throw fail("response for unrequested id '" + id + "'");
    if (!resp.contains("score") || !resp["score"].is_number()) throw fail("response for '" + id + "' has no numeric score");
    const double s = resp["score"].get<double>();
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) throw fail("score for '" + id + "' is outside [0,1]");
    scores[it->second] = s;
    pending.erase(it);
  }
  writer.join();
  if (!write_ok) {
    broken_ = true;
    close_connection();
    throw DataError("external scorer: failed to send requests");
  }
  return scores;
}

}  // namespace lexent::scorer
