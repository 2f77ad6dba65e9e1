#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "srm/core.hpp"
#include "srm/dataset_io.hpp"
#include "srm/error.hpp"

using namespace srm;
using A = AgentType;

namespace {

Dilemma random_dilemma(std::mt19937_64& rng, int i) {
  std::uniform_int_distribution<int> agent(0, 19), k(0, 2), sig(0, 2), side(0, 1);
  Dilemma d;
  d.id = "r" + std::to_string(i);
  for (int j = 0; j < 4; ++j) {
    d.left[agent(rng)] += k(rng);
    d.right[agent(rng)] += k(rng);
  }
  d.signal_left = static_cast<Signal>(sig(rng));
  d.car_side = static_cast<Side>(side(rng));
  return d;
}

}  // namespace

TEST_CASE("agent names round-trip in canonical order") {
  const auto& all = all_agent_types();
  REQUIRE(all.size() == 20);
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(index_of(all[i]) == i);
    CHECK(parse_agent_type(agent_name(all[i])) == all[i]);
  }
  CHECK(agent_name(A::OldWoman) == "OldWoman");
  CHECK_FALSE(parse_agent_type("Robot").has_value());
}

TEST_CASE("signal of the other side") {
  CHECK(opposite(Signal::Legal) == Signal::Illegal);
  CHECK(opposite(Signal::Illegal) == Signal::Legal);
  CHECK(opposite(Signal::None) == Signal::None);
}

TEST_CASE("encoding of an empty dilemma") {
  const Dilemma d = fixtures::dilemma({}, {}, Signal::None, Side::Left);
  const Encoding e = encode_dilemma(d);
  for (std::size_t i = 0; i < 40; ++i) CHECK(e[i] == 0.0);
  CHECK(e[40] == 1.0);
  CHECK(e[41] == 0.0);
}

TEST_CASE("encoding of the first-figure dilemma") {
  const Encoding e = encode_dilemma(fixtures::figure_one());
  for (std::size_t i = 0; i < 20; ++i) {
    const bool left_hit = i == index_of(A::Girl) || i == index_of(A::OldWoman) || i == index_of(A::Dog);
    const bool right_hit = i == index_of(A::Stroller) || i == index_of(A::Woman) || i == index_of(A::Dog);
    CHECK(e[i] == (left_hit ? 1.0 : 0.0));
    CHECK(e[20 + i] == (right_hit ? 1.0 : 0.0));
  }
  CHECK(e[40] == 1.0);
  CHECK(e[41] == -1.0);
}

TEST_CASE("mirroring the first-figure dilemma") {
  const Dilemma d = fixtures::figure_one();
  const Dilemma m = mirror(d);
  CHECK(m.left == d.right);
  CHECK(m.right == d.left);
  CHECK(m.signal_left == Signal::Legal);
  CHECK(m.car_side == Side::Right);
  CHECK(m.id == d.id);
}

TEST_CASE("mirroring a symmetric dilemma only moves the car") {
  const Dilemma d = fixtures::dilemma({{A::Man, 2}}, {{A::Man, 2}}, Signal::None, Side::Left);
  const Dilemma m = mirror(d);
  CHECK(m.left == d.left);
  CHECK(m.right == d.right);
  CHECK(m.signal_left == Signal::None);
  CHECK(m.car_side == Side::Right);
}

TEST_CASE("property: mirror is an involution and swaps the encoding") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const Dilemma d = random_dilemma(rng, i);
    CHECK(mirror(mirror(d)) == d);
    const Encoding e = encode_dilemma(d);
    const Encoding em = encode_dilemma(mirror(d));
    for (std::size_t j = 0; j < 20; ++j) {
      CHECK(em[j] == e[20 + j]);
      CHECK(em[20 + j] == e[j]);
    }
    CHECK(em[40] == -e[40]);
    CHECK(em[41] == -e[41] + 0.0);
  }
}

TEST_CASE("judgment validation") {
  const Dilemma d = fixtures::dilemma({{A::Man, 1}}, {{A::Dog, 1}});
  CHECK_NOTHROW(validate({d, 10, 10}));
  CHECK_THROWS_AS(validate({d, 0, 0}), ConfigError);
  CHECK_THROWS_AS(validate({d, 10, 11}), ConfigError);
  CHECK_THROWS_AS(validate({d, 10, -1}), ConfigError);
  Dilemma neg = d;
  neg.left[0] = -1;
  CHECK_THROWS_AS(validate({neg, 10, 3}), ConfigError);
}

TEST_CASE("dataset JSONL round-trip") {
  std::mt19937_64 rng(3);
  std::vector<AggregatedJudgment> data;
  for (int i = 0; i < 50; ++i) data.push_back({random_dilemma(rng, i), 100 + i, i});
  std::stringstream ss;
  write_dataset(ss, data);
  CHECK(read_dataset(ss) == data);
}

TEST_CASE("dataset line format") {
  std::stringstream ss;
  const std::vector<AggregatedJudgment> one{{fixtures::figure_one(), 649, 4}};
  write_dataset(ss, one);
  CHECK(ss.str() ==
        "{\"id\":\"fig1\",\"left\":{\"OldWoman\":1,\"Girl\":1,\"Dog\":1},"
        "\"right\":{\"Woman\":1,\"Stroller\":1,\"Dog\":1},\"signal_left\":\"illegal\","
        "\"car_side\":\"left\",\"n\":649,\"n_save_left\":4}\n");
}

TEST_CASE("dataset parse errors carry the line number") {
  std::stringstream ss(
      "{\"id\":\"a\",\"left\":{\"Man\":1},\"right\":{},\"signal_left\":\"none\",\"car_side\":\"left\",\"n\":3,\"n_save_left\":1}\n"
      "\n"
      "{\"id\":\"b\",\"left\":{\"Robot\":1},\"right\":{},\"signal_left\":\"none\",\"car_side\":\"left\",\"n\":3,\"n_save_left\":1}\n");
  try {
    read_dataset(ss);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("Robot") != std::string::npos);
  }
  std::stringstream bad_json("not json\n");
  CHECK_THROWS_AS(read_dataset(bad_json), ParseError);
  std::stringstream bad_counts(
      "{\"id\":\"a\",\"left\":{},\"right\":{},\"signal_left\":\"none\",\"car_side\":\"left\",\"n\":3,\"n_save_left\":5}\n");
  CHECK_THROWS_AS(read_dataset(bad_counts), ParseError);
}
