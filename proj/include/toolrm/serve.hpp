#pragma once

#include <memory>
#include <string>

#include "toolrm/json.hpp"
#include "toolrm/trainer.hpp"

namespace toolrm {

/// HTTP front end for a builtin reward model: POST /score, POST /score_batch,
/// GET /healthz. Model parameters are immutable once constructed, so request
/// handling needs no locking.
class ScoreServer {
 public:
  explicit ScoreServer(RewardModel model, std::size_t threads = 8);
  ~ScoreServer();
  ScoreServer(const ScoreServer&) = delete;
  ScoreServer& operator=(const ScoreServer&) = delete;

  /// Binds without listening. Port 0 picks an ephemeral port. Returns the
  /// bound port; throws IoError on failure.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop(). Requires bind().
  void listen();
  /// Blocks until listen() is accepting connections.
  void wait_until_ready() const;
  /// Stops accepting connections; requests already being handled complete.
  void stop();

  Json health() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Body of GET /healthz for a model.
Json health_json(const RewardModel& model);

/// Runs a server until SIGTERM or SIGINT. Prints "listening on HOST:PORT"
/// to stdout once bound. Returns 0 after a clean shutdown, 1 when the
/// address cannot be bound.
int serve_score(const std::string& model_path, const std::string& host, int port, std::size_t threads = 8);

}  // namespace toolrm
