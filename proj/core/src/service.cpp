#include "srm/service.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "srm/dataset_io.hpp"
#include "srm/error.hpp"
#include "srm/features.hpp"

namespace srm {

namespace {

std::string_view kind_name(JobKind k) {
  switch (k) {
    case JobKind::Refit:
      return "refit";
    case JobKind::TrainReference:
      return "train_reference";
    case JobKind::Iterate:
      break;
  }
  return "iterate";
}

std::string_view job_status_name(JobStatus s) {
  switch (s) {
    case JobStatus::Queued:
      return "queued";
    case JobStatus::Running:
      return "running";
    case JobStatus::Done:
      return "done";
    case JobStatus::Failed:
      break;
  }
  return "failed";
}

void send_json(httplib::Response& res, const nlohmann::ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                nlohmann::ordered_json extra = nlohmann::ordered_json::object()) {
  extra["error"] = message;
  nlohmann::ordered_json body;
  body["error"] = message;
  for (auto& [k, v] : extra.items()) {
    if (k != "error") body[k] = v;
  }
  send_json(res, body, status);
}

template <typename T>
bool parse_param(const httplib::Request& req, const char* key, T& out, httplib::Response& res) {
  if (!req.has_param(key)) return true;
  try {
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(req.get_param_value(key));
    } else {
      const long v = std::stol(req.get_param_value(key));
      if (v < 0) throw std::invalid_argument("negative");
      out = static_cast<T>(v);
    }
  } catch (const std::exception&) {
    send_error(res, 400, std::string("invalid value for '") + key + "'");
    return false;
  }
  return true;
}

}  // namespace

nlohmann::ordered_json to_json(const JobState& job) {
  nlohmann::ordered_json j;
  j["id"] = job.id;
  j["kind"] = std::string(kind_name(job.kind));
  j["status"] = std::string(job_status_name(job.status));
  j["progress"] = job.progress;
  j["error"] = job.error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(job.error);
  return j;
}

struct SessionService::Impl {
  ServiceOptions options;
  httplib::Server server;
  int bound_port = -1;
  std::thread listener;

  mutable std::mutex state_mu;
  std::shared_ptr<const Session> current;
  std::map<std::string, JobState> jobs;
  int next_job = 1;

  struct Pending {
    std::string job_id;
    std::string text;
    bool retrain = false;
  };
  std::deque<Pending> queue;
  bool busy = false;  // a job is queued or running
  std::condition_variable cv;
  bool stopping = false;
  std::thread worker;

  Impl(Session s, ServiceOptions o)
      : options(std::move(o)), current(std::make_shared<const Session>(std::move(s))) {
    routes();
    worker = std::thread([this] { work(); });
  }

  ~Impl() {
    {
      std::lock_guard lock(state_mu);
      stopping = true;
    }
    cv.notify_all();
    server.stop();
    if (listener.joinable()) listener.join();
    if (worker.joinable()) worker.join();
  }

  std::shared_ptr<const Session> snap() const {
    std::lock_guard lock(state_mu);
    return current;
  }

  void set_job(const std::string& id, JobStatus status, double progress, std::string error = {}) {
    std::lock_guard lock(state_mu);
    auto& job = jobs.at(id);
    if (job.terminal()) return;
    job.status = status;
    job.progress = progress;
    job.error = std::move(error);
  }

  void work() {
    for (;;) {
      Pending p;
      {
        std::unique_lock lock(state_mu);
        cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        p = std::move(queue.front());
        queue.pop_front();
      }
      set_job(p.job_id, JobStatus::Running, 0.0);
      try {
        // Mutate a private copy, then publish it in one step.
        Session next = *snap();
        next.iterate(p.text, p.retrain, [&](double f) {
          std::lock_guard lock(state_mu);
          jobs.at(p.job_id).progress = f;
        });
        if (!options.session_dir.empty()) next.save(options.session_dir);
        {
          std::lock_guard lock(state_mu);
          current = std::make_shared<const Session>(std::move(next));
        }
        set_job(p.job_id, JobStatus::Done, 1.0);
      } catch (const std::exception& e) {
        std::lock_guard lock(state_mu);
        auto& job = jobs.at(p.job_id);
        job.status = JobStatus::Failed;
        job.error = e.what();
      }
      std::lock_guard lock(state_mu);
      busy = !queue.empty();
    }
  }

  void routes() {
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    });

    server.Get("/api/state", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_ptr<const Session> s;
      bool running = false;
      {
        std::lock_guard lock(state_mu);
        s = current;
        running = busy;
      }
      auto body = s->state_json();
      if (running) body["status"] = std::string(status_name(SessionStatus::Fitting));
      send_json(res, body);
    });

    server.Get("/api/metrics", [this](const httplib::Request&, httplib::Response& res) {
      const auto s = snap();
      auto out = nlohmann::ordered_json::array();
      for (const auto& r : s->history()) {
        out.push_back({{"index", r.index},
                       {"added", r.added},
                       {"choice", to_json(r.choice)},
                       {"reference", to_json(r.reference)}});
      }
      send_json(res, out);
    });

    server.Get("/api/residuals", [this](const httplib::Request& req, httplib::Response& res) {
      const auto s = snap();
      const std::string kind = req.has_param("kind") ? req.get_param_value("kind") : "smoothed";
      if (kind != "raw" && kind != "smoothed") {
        send_error(res, 400, "kind must be raw or smoothed");
        return;
      }
      std::size_t top = s->config().top_k;
      int min_n = s->config().min_n;
      if (!parse_param(req, "top", top, res) || !parse_param(req, "min_n", min_n, res)) return;
      auto records = nlohmann::ordered_json::array();
      for (const auto& r : s->residuals(kind == "smoothed", top, min_n)) {
        auto j = to_json(r);
        j["dilemma"] = dilemma_to_json(s->find(r.id)->dilemma);
        records.push_back(std::move(j));
      }
      send_json(res, {{"kind", kind}, {"top", top}, {"min_n", min_n}, {"records", std::move(records)}});
    });

    server.Get(R"(/api/dilemma/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto s = snap();
      const std::string id = req.matches[1];
      const AggregatedJudgment* j = s->find(id);
      if (!j) {
        send_error(res, 404, "no dilemma with id '" + id + "'");
        return;
      }
      auto body = judgment_to_json(*j);
      body["p_data"] = j->p_data();
      body["p_model"] = s->choice().predict_save_left(j->dilemma);
      body["p_reference"] = predict_save_left(s->reference(), j->dilemma);
      auto axes = nlohmann::ordered_json::object();
      for (const auto& axis : axis_catalog()) {
        const auto side = classify_axis(j->dilemma, axis);
        axes[axis.name] = side ? nlohmann::ordered_json(std::string(side_name(*side))) : nlohmann::ordered_json(nullptr);
      }
      body["axes"] = std::move(axes);
      send_json(res, body);
    });

    server.Get("/api/features", [this](const httplib::Request&, httplib::Response& res) {
      const auto s = snap();
      auto axes = nlohmann::ordered_json::array();
      for (const auto& axis : axis_catalog()) axes.push_back(axis.name);
      send_json(res, {{"text", s->features().to_text()},
                      {"names", s->features().names()},
                      {"feature_hash", s->features().hash()},
                      {"axes", std::move(axes)}});
    });

    server.Post("/api/iterate", [this](const httplib::Request& req, httplib::Response& res) {
      std::string text = req.body;
      if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        send_error(res, 400, "empty feature text");
        return;
      }
      const bool retrain = req.has_param("retrain_reference") &&
                           req.get_param_value("retrain_reference") != "0" &&
                           req.get_param_value("retrain_reference") != "false";
      std::lock_guard lock(state_mu);
      if (busy) {
        send_error(res, 409, "another job is queued or running");
        return;
      }
      try {
        const FeatureSet fs = extend_feature_set(current->features(), text);
        if (fs.size() == current->features().size()) {
          send_error(res, 400, "feature text defines no features");
          return;
        }
      } catch (const ParseError& e) {
        send_error(res, 400, e.what(), {{"line", e.line()}});
        return;
      } catch (const Error& e) {
        send_error(res, 400, e.what());
        return;
      }
      JobState job;
      job.id = "job-" + std::to_string(next_job++);
      job.kind = retrain ? JobKind::TrainReference : JobKind::Iterate;
      jobs[job.id] = job;
      queue.push_back({job.id, std::move(text), retrain});
      busy = true;
      cv.notify_one();
      send_json(res, {{"job", job.id}}, 202);
    });

    server.Get(R"(/api/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(state_mu);
      const auto it = jobs.find(req.matches[1]);
      if (it == jobs.end()) {
        send_error(res, 404, "unknown job '" + std::string(req.matches[1]) + "'");
        return;
      }
      send_json(res, to_json(it->second));
    });

    server.Post("/api/stopcheck", [this](const httplib::Request& req, httplib::Response& res) {
      const auto s = snap();
      double eps = s->config().stop_epsilon;
      if (!parse_param(req, "epsilon", eps, res)) return;
      if (eps < 0) {
        send_error(res, 400, "epsilon must be non-negative");
        return;
      }
      const auto& last = s->history().back();
      send_json(res, {{"epsilon", eps},
                      {"converged", s->stopping_check(eps)},
                      {"accuracy_gap", last.reference.accuracy - last.choice.accuracy},
                      {"auc_gap", last.reference.auc - last.choice.auc}});
    });

    if (!options.static_dir.empty()) server.set_mount_point("/", options.static_dir.string());
  }
};

SessionService::SessionService(Session session, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(session), std::move(options))) {}

SessionService::~SessionService() = default;

int SessionService::bind() {
  if (impl_->options.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(impl_->options.host);
  } else if (impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->bound_port = impl_->options.port;
  }
  if (impl_->bound_port < 0) {
    throw Error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  return impl_->bound_port;
}

void SessionService::listen() { impl_->server.listen_after_bind(); }

int SessionService::start() {
  const int p = bind();
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return p;
}

void SessionService::stop() {
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

int SessionService::port() const { return impl_->bound_port; }

std::shared_ptr<const Session> SessionService::snapshot() const { return impl_->snap(); }

}  // namespace srm
