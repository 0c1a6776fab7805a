#include "toolrm/serve.hpp"

#include <csignal>
#include <iostream>
#include <pthread.h>
#include <thread>

#include <httplib.h>

#include "toolrm/error.hpp"
#include "toolrm/features.hpp"
#include "toolrm/gateway.hpp"
#include "toolrm/prompt.hpp"

namespace toolrm {

namespace {

constexpr const char* kJsonType = "application/json";

void reply_error(httplib::Response& res, int status, const std::string& message) {
  Json body = Json::object();
  body["error"] = message;
  res.status = status;
  res.set_content(body.dump(), kJsonType);
}

Json parse_body(const httplib::Request& req) {
  Json body = Json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded()) throw UsageError("request body is not valid JSON");
  return body;
}

double score_one(const RewardModel& model, const Json& body) {
  auto [context, candidate] = score_request_from_json(body);
  return model.score(context, candidate);
}

}  // namespace

Json health_json(const RewardModel& model) {
  Json j = Json::object();
  j["status"] = "ok";
  j["model"] = "builtin";
  j["spec_version"] = model.spec.version;
  j["dimension"] = model.spec.dimension;
  j["template"] = std::string(kRewardTemplateId);
  j["truncation"] = "none: the builtin model reads the full context";
  return j;
}

struct ScoreServer::Impl {
  RewardModel model;
  httplib::Server server;
  bool bound = false;
};

ScoreServer::ScoreServer(RewardModel model, std::size_t threads) : impl_(std::make_unique<Impl>()) {
  impl_->model = std::move(model);
  const std::size_t n = threads == 0 ? 1 : threads;
  impl_->server.new_task_queue = [n] { return new httplib::ThreadPool(n); };
  // httplib's default adds SO_REUSEPORT, which lets a second server share the
  // port silently; a collision should fail instead.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  const RewardModel& m = impl_->model;

  impl_->server.Post("/score", [&m](const httplib::Request& req, httplib::Response& res) {
    try {
      Json reply = Json::object();
      reply["reward"] = score_one(m, parse_body(req));
      res.set_content(reply.dump(), kJsonType);
    } catch (const std::exception& e) {
      reply_error(res, 400, e.what());
    }
  });

  impl_->server.Post("/score_batch", [&m](const httplib::Request& req, httplib::Response& res) {
    try {
      Json body = parse_body(req);
      if (!body.is_object() || !body.contains("items") || !body.at("items").is_array()) {
        throw UsageError("expected {\"items\": [...]}");
      }
      Json rewards = Json::array();
      const Json& items = body.at("items");
      for (std::size_t i = 0; i < items.size(); ++i) {
        try {
          rewards.push_back(score_one(m, items[i]));
        } catch (const std::exception& e) {
          throw UsageError("item " + std::to_string(i) + ": " + e.what());
        }
      }
      Json reply = Json::object();
      reply["rewards"] = std::move(rewards);
      res.set_content(reply.dump(), kJsonType);
    } catch (const std::exception& e) {
      reply_error(res, 400, e.what());
    }
  });

  impl_->server.Get("/healthz", [&m](const httplib::Request&, httplib::Response& res) {
    res.set_content(health_json(m).dump(), kJsonType);
  });
}

ScoreServer::~ScoreServer() { stop(); }

int ScoreServer::bind(const std::string& host, int port) {
  int bound = 0;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound;
}

void ScoreServer::listen() {
  if (!impl_->bound) throw UsageError("ScoreServer::listen called before bind");
  impl_->server.listen_after_bind();
}

void ScoreServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void ScoreServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

Json ScoreServer::health() const { return health_json(impl_->model); }

int serve_score(const std::string& model_path, const std::string& host, int port, std::size_t threads) {
  RewardModel model = load_model(model_path);
  if (model.spec.version != kFeatureSpecVersion) {
    throw UsageError("model " + model_path + " uses feature spec '" + model.spec.version + "'");
  }

  // Block the termination signals before any server thread exists so they
  // are delivered only to the sigwait below.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGINT);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ScoreServer server(std::move(model), threads);
  int bound = 0;
  try {
    bound = server.bind(host, port);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << "listening on " << host << ':' << bound << std::endl;

  std::thread worker([&server] { server.listen(); });
  // A signal that arrives early stays pending until sigwait, and stop() is
  // only effective once the server is running.
  server.wait_until_ready();
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  worker.join();
  std::cerr << "shut down on signal " << sig << '\n';
  return 0;
}

}  // namespace toolrm
