#include <catch2/catch_amalgamated.hpp>

#include "probound/mdp.hpp"
#include "probound/model_io.hpp"
#include "support/helpers.hpp"

using namespace probound;

namespace {

const char* kThreeStateDtmc =
    "# a 3-state DTMC\n"
    "mdp 3 0\n"
    "label goal 1\n"
    "state 0:\n"
    "  1/2 -> 1, 1/2 -> 2\n"
    "state 1:\n"
    "  1/1 -> 1\n"
    "state 2:\n"
    "  1/1 -> 2\n";

}  // namespace

TEST_CASE("parsing a small DTMC keeps probabilities exact", "[model]") {
  Mdp m = parse_model(std::string(kThreeStateDtmc));
  REQUIRE(m.state_count == 3);
  CHECK(m.initial == 0);
  CHECK(m.is_dtmc());
  REQUIRE(m.transitions[0].size() == 1);
  CHECK(m.transitions[0][0].branches[0].prob == Rational(1, 2));
  CHECK(m.transitions[0][0].branches[1].prob == Rational(1, 2));
  CHECK(m.labels.at("goal") == std::vector<StateIndex>{1});
  CHECK(is_valid(m));
}

TEST_CASE("parser reports distribution sums with the exact total", "[model]") {
  std::string bad =
      "mdp 4 0\n"
      "state 0:\n"
      "  1/3 -> 1, 1/3 -> 2, 1/4 -> 3\n"
      "state 1:\n  1/1 -> 1\nstate 2:\n  1/1 -> 2\nstate 3:\n  1/1 -> 3\n";
  try {
    parse_model(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("sums to 11/12, not 1") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("parser rejects structural errors with line numbers", "[model]") {
  CHECK_THROWS_AS(parse_model(std::string("mdp 2 0\nstate 0:\n  1/1 -> 5\n")),
                  ParseError);
  CHECK_THROWS_AS(parse_model(std::string("mdp 1 0\nstate 0:\n  0.5 -> 0\n")),
                  ParseError);
  CHECK_THROWS_AS(
      parse_model(std::string("mdp 1 0\nstate 0:\n  1/2 -> 0, 1/2 -> 0\n")),
      ParseError);
  CHECK_THROWS_AS(parse_model(std::string("mdp 1 0\nstate 0:\n  0/2 -> 0, 1/1 -> 0\n")),
                  ParseError);
  // missing transitions for state 1
  CHECK_THROWS_AS(parse_model(std::string("mdp 2 0\nstate 0:\n  1/1 -> 0\n")),
                  ParseError);
  CHECK_THROWS_AS(parse_model(std::string("state 0:\n  1/1 -> 0\n")), ParseError);
}

TEST_CASE("validate pinpoints violations", "[model]") {
  Mdp m = build_counterexample(1, Rational(1, 10));
  CHECK(validate(m).empty());

  Mdp empty_state = m;
  empty_state.transitions[2].clear();
  auto v1 = validate(empty_state);
  REQUIRE(v1.size() == 1);
  CHECK(v1[0].message == "empty transition set at state 2");

  Mdp deficit = m;
  deficit.transitions[0][0].branches.pop_back();
  deficit.transitions[0][0].branches[0].prob = Rational(3, 4);
  auto v2 = validate(deficit);
  REQUIRE(v2.size() == 1);
  CHECK(v2[0].message.find("deficit 1/4") != std::string::npos);
}

TEST_CASE("serialisation round-trips and is deterministic", "[model]") {
  Mdp m1 = build_counterexample(1, Rational(1, 10));
  Mdp m2 = build_counterexample(2, Rational(1, 10));
  CHECK(parse_model(serialize_model(m1)) == m1);
  CHECK(parse_model(serialize_model(m2)) == m2);
  CHECK(serialize_model(m2) == serialize_model(m2));

  Mdp no_labels = m1;
  no_labels.labels.clear();
  CHECK(parse_model(serialize_model(no_labels)) == no_labels);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 25; ++i) {
    Mdp r = testutil::random_mdp(rng);
    CHECK(parse_model(serialize_model(r)) == r);
  }
}

TEST_CASE("gamma chain family has the documented shape", "[model]") {
  Mdp m = build_counterexample(1, Rational(1, 10));
  CHECK(m.state_count == 5);
  CHECK(m.branch_count() == 9);
  CHECK(m.is_dtmc());
  CHECK(is_valid(m));

  Mdp m0 = build_counterexample(0, Rational(1, 4));
  CHECK(m0.state_count == 4);
  CHECK(m0.branch_count() == 7);

  for (StateIndex n : {0u, 3u, 17u, 50u})
    for (const Rational& g : {Rational(1, 10), Rational(1, 4), Rational(1, 3)}) {
      Mdp mn = build_counterexample(n, g);
      CHECK(mn.state_count == 4 + n);
      CHECK(mn.branch_count() == 7 + 2 * static_cast<std::size_t>(n));
      CHECK(is_valid(mn));
    }

  CHECK_THROWS_AS(build_counterexample(1, Rational(1, 2)), std::domain_error);
  CHECK_THROWS_AS(build_counterexample(1, Rational(0)), std::domain_error);
  CHECK_THROWS_AS(build_counterexample(1, Rational(3, 4)), std::domain_error);
}

TEST_CASE("every transition of parsed or generated models sums to one", "[model]") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i) {
    Mdp m = i % 2 == 0 ? testutil::random_mdp(rng)
                       : build_counterexample(i % 7, Rational(1, 3 + i % 5));
    for (const auto& ts : m.transitions)
      for (const auto& tr : ts) {
        Rational sum = 0;
        for (const auto& b : tr.branches) sum += b.prob;
        REQUIRE(sum == 1);
      }
  }
}

TEST_CASE("goal normalisation makes goals absorbing", "[model]") {
  Mdp m = testutil::branching_model();
  m.transitions[1].clear();
  m.transitions[1].push_back(
      Transition{{Branch{0, Rational(1, 2)}, Branch{1, Rational(1, 2)}}});
  REQUIRE(is_valid(m));
  Mdp n = make_absorbing(m, {1});
  REQUIRE(n.transitions[1].size() == 1);
  CHECK(n.transitions[1][0].branches.size() == 1);
  CHECK(n.transitions[1][0].branches[0].target == 1);
  CHECK(n.transitions[1][0].branches[0].prob == 1);
  CHECK(is_valid(n));
}
