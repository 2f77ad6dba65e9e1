#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "fixtures.hpp"
#include "srm/service.hpp"
#include "srm/synth.hpp"

// After Eigen: <resolv.h> defines a `_res` macro.
#include <httplib.h>

using namespace srm;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

Session small_session() {
  const FeatureSet truth_fs = extend_feature_set(hybrid_feature_set(), "indicator hva axis:humans_vs_animals:favored");
  Eigen::VectorXd w(23);
  w << fixtures::hybrid_truth_weights(), 1.2;
  PopulationConfig cfg;
  cfg.n_dilemmas = 400;
  cfg.min_judgments = 100;
  cfg.max_judgments = 2000;
  auto data = sample_dataset(ChoiceModel(truth_fs, w), sample_dilemma_population(cfg, 3), cfg, 4);
  SessionConfig sc;
  sc.seed = 9;
  sc.mlp.max_epochs = 30;
  sc.mlp.batch_size = 64;
  return Session::create(std::move(data), hybrid_feature_text(), sc);
}

const Session& shared_session() {
  static const Session s = small_session();
  return s;
}

json get_json(httplib::Client& c, const std::string& path, int expect = 200) {
  const auto res = c.Get(path);
  REQUIRE(res);
  CHECK_MESSAGE(res->status == expect, path << " -> " << res->status << " " << res->body);
  CHECK(res->get_header_value("Content-Type") == "application/json");
  return json::parse(res->body);
}

json wait_for_job(httplib::Client& c, const std::string& id) {
  for (int i = 0; i < 600; ++i) {
    const json job = get_json(c, "/api/jobs/" + id);
    if (job["status"] == "done" || job["status"] == "failed") return job;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  FAIL("job did not finish");
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("srm_service_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("read endpoints") {
  SessionService svc(shared_session(), {});
  const int port = svc.start();
  httplib::Client c("127.0.0.1", port);

  const json state = get_json(c, "/api/state");
  CHECK(state["history"].size() == 1);
  CHECK(state["status"] == "idle");

  const json metrics = get_json(c, "/api/metrics");
  REQUIRE(metrics.size() == 1);
  CHECK(metrics[0]["choice"]["accuracy"].get<double>() == shared_session().history()[0].choice.accuracy);

  const json res = get_json(c, "/api/residuals?kind=smoothed&top=5");
  REQUIRE(res["records"].size() == 5);
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(std::abs(res["records"][i - 1]["smoothed"].get<double>()) >=
          std::abs(res["records"][i]["smoothed"].get<double>()));
  }
  CHECK(res["records"][0]["dilemma"].contains("left"));
  CHECK(res["records"][0]["dilemma"].contains("car_side"));

  const json raw = get_json(c, "/api/residuals?kind=raw&top=3&min_n=500");
  CHECK(raw["records"].size() <= 3);
  for (const auto& r : raw["records"]) CHECK(r["n"].get<int>() >= 500);
  get_json(c, "/api/residuals?kind=weird", 400);
  const json bad = get_json(c, "/api/residuals?top=-2", 400);
  CHECK(bad.contains("error"));

  const std::string id = res["records"][0]["id"];
  const json d = get_json(c, "/api/dilemma/" + id);
  CHECK(d["id"] == id);
  CHECK(d["p_model"].get<double>() == doctest::Approx(res["records"][0]["p_model"].get<double>()).epsilon(1e-15));
  CHECK(d["axes"].contains("humans_vs_animals"));
  CHECK(get_json(c, "/api/dilemma/nope", 404)["error"].is_string());

  const json feats = get_json(c, "/api/features");
  CHECK(feats["text"] == hybrid_feature_set().to_text());
  CHECK(feats["names"].size() == 22);
  CHECK(feats["axes"].size() > 0);

  get_json(c, "/api/jobs/job-999", 404);
  svc.stop();
}

TEST_CASE("iterate, poll and observe the new report") {
  const fs::path dir = scratch("persist");
  ServiceOptions opts;
  opts.session_dir = dir;
  SessionService svc(shared_session(), opts);
  const int port = svc.start();
  httplib::Client c("127.0.0.1", port);

  auto r = c.Post("/api/iterate", "", "text/plain");
  REQUIRE(r);
  CHECK(r->status == 400);

  r = c.Post("/api/iterate", "indicator fine signal:illegal\nindicator x axis:nope:favored\n", "text/plain");
  REQUIRE(r);
  CHECK(r->status == 400);
  const json err = json::parse(r->body);
  CHECK(err["line"] == 2);
  CHECK(err["error"].get<std::string>().find("line 2") != std::string::npos);

  r = c.Post("/api/iterate?retrain_reference=1", "indicator hva axis:humans_vs_animals:favored\n", "text/plain");
  REQUIRE(r);
  REQUIRE(r->status == 202);
  const std::string job_id = json::parse(r->body)["job"];

  // A second mutation while the first is queued or running conflicts.
  r = c.Post("/api/iterate", "indicator other signal:none\n", "text/plain");
  REQUIRE(r);
  CHECK(r->status == 409);

  // Readers see either the old or the new snapshot, never a mix.
  const json mid = get_json(c, "/api/state");
  CHECK(mid["history"].size() == mid["n_features"].get<std::size_t>() - 21);

  const json job = wait_for_job(c, job_id);
  CHECK(job["status"] == "done");
  CHECK(job["progress"] == 1.0);
  CHECK(job["kind"] == "train_reference");
  CHECK(get_json(c, "/api/metrics").size() == 2);
  CHECK(get_json(c, "/api/features")["names"].size() == 23);

  const std::string state_before = c.Get("/api/state")->body;
  svc.stop();

  // Restarting on the persisted directory serves the same state.
  SessionService again(Session::load(dir), opts);
  const int port2 = again.start();
  httplib::Client c2("127.0.0.1", port2);
  CHECK(c2.Get("/api/state")->body == state_before);
  again.stop();
  fs::remove_all(dir);
}

TEST_CASE("stop check endpoint") {
  SessionService svc(shared_session(), {});
  const int port = svc.start();
  httplib::Client c("127.0.0.1", port);
  auto r = c.Post("/api/stopcheck?epsilon=1", "", "text/plain");
  REQUIRE(r);
  CHECK(r->status == 200);
  const json body = json::parse(r->body);
  CHECK(body["converged"] == true);
  CHECK(body["epsilon"] == 1.0);
  r = c.Post("/api/stopcheck?epsilon=abc", "", "text/plain");
  REQUIRE(r);
  CHECK(r->status == 400);
  r = c.Post("/api/stopcheck?epsilon=-1", "", "text/plain");
  REQUIRE(r);
  CHECK(r->status == 400);
  svc.stop();
}

TEST_CASE("static assets are served from the root") {
  const fs::path dir = scratch("static");
  std::ofstream(dir / "index.html") << "<html>workbench</html>";
  ServiceOptions opts;
  opts.static_dir = dir;
  SessionService svc(shared_session(), opts);
  const int port = svc.start();
  httplib::Client c("127.0.0.1", port);
  const auto r = c.Get("/");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->body == "<html>workbench</html>");
  svc.stop();
  fs::remove_all(dir);
}
