#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lexent::scorer {

/// Where an external scorer lives: a child process spoken to over its
/// standard streams, or a TCP endpoint.
///
///   "tcp://host:port" or "host:port"  -> TCP
///   "exec:<command>" or anything else -> /bin/sh -c <command>
struct Endpoint {
  enum class Kind { process, tcp };
  Kind kind = Kind::process;
  std::string command;
  std::string host;
  std::uint16_t port = 0;

  static Endpoint parse(std::string_view spec);
};

/// JSON-lines scorer bridge.
///
///   request:  {"id":"<string>","text_a":"<string>","text_b":"<string>"}\n
///   response: {"id":"<string>","score":<real in [0,1]>}\n
///
/// All requests of a call are written by a separate thread while responses
/// are read, so the peer may answer out of order. A response for an id that
/// is not pending, a missing id, or a malformed score is a protocol error
/// (DataError) and leaves the connection closed.
class ExternalScorer {
 public:
  explicit ExternalScorer(Endpoint endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(120));
  ~ExternalScorer();

  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  std::vector<double> score(const std::vector<std::pair<std::string, std::string>>& pairs);

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  void connect();
  void close_connection();

  Endpoint endpoint_;
  std::chrono::milliseconds timeout_;
  std::mutex mutex_;
  int read_fd_ = -1;
  int write_fd_ = -1;
  int child_pid_ = -1;
  bool broken_ = false;
  std::uint64_t next_call_ = 0;
  std::string buffer_;
};

}  // namespace lexent::scorer
