#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "srm/session.hpp"

namespace srm {

enum class JobKind { Refit, TrainReference, Iterate };
enum class JobStatus { Queued, Running, Done, Failed };

struct JobState {
  std::string id;
  JobKind kind = JobKind::Iterate;
  JobStatus status = JobStatus::Queued;
  double progress = 0.0;
  std::string error;

  bool terminal() const { return status == JobStatus::Done || status == JobStatus::Failed; }
};

nlohmann::ordered_json to_json(const JobState& job);

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  // Where the session is persisted after each iteration; empty disables saving.
  std::filesystem::path session_dir;
  // Static UI assets served from `/`; empty disables.
  std::filesystem::path static_dir;
};

// Local HTTP API over one live session.
//   GET  /api/state                 session summary and iteration history
//   GET  /api/metrics               per-iteration metric reports
//   GET  /api/residuals?kind=raw|smoothed&top=K&min_n=M
//   GET  /api/dilemma/{id}
//   GET  /api/features
//   POST /api/iterate               body: feature-spec text; returns a job id
//   GET  /api/jobs/{id}
//   POST /api/stopcheck?epsilon=E
// Errors are {"error": "..."} with status 400, 404 or 409. Mutations run one at
// a time on a worker thread; readers always see a complete session snapshot.
class SessionService {
 public:
  SessionService(Session session, ServiceOptions options);
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  // Binds the listening socket and returns the port. Throws Error on failure.
  int bind();
  // Serves until stop(); bind() first.
  void listen();
  // bind() and serve on a background thread.
  int start();
  void stop();
  int port() const;

  // Latest complete snapshot.
  std::shared_ptr<const Session> snapshot() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace srm
