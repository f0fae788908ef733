#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "bang/syntax.hpp"
#include "support/gen.hpp"

using namespace bang;

TEST_CASE("parse basics") {
  PreTensor p = parse_tensor("phi(<+a]B) [psi(-a)]B");
  REQUIRE(p.factors.size() == 2);
  const auto* a = std::get_if<Atom>(&p.factors[0].v);
  REQUIRE(a);
  const auto* g = std::get_if<EdgeGroup>(&a->edges.items[0].v);
  REQUIRE(g);
  CHECK(!g->clockwise);
  CHECK(g->box == "B");
  CHECK(std::get_if<BangBox>(&p.factors[1].v));

  CHECK(parse_tensor("1").factors.empty());

  PreTensor nested = parse_tensor("phi(+a [<-b]B>A) [[phi(+b -c)]B]A");
  const auto* a2 = std::get_if<Atom>(&nested.factors[0].v);
  REQUIRE(a2);
  const auto* outer = std::get_if<EdgeGroup>(&a2->edges.items[1].v);
  REQUIRE(outer);
  CHECK(outer->box == "A");
  CHECK(outer->clockwise);
  const auto* inner = std::get_if<EdgeGroup>(&outer->body.items[0].v);
  REQUIRE(inner);
  CHECK(inner->box == "B");
  CHECK(!inner->clockwise);
}

TEST_CASE("print normalizes whitespace") {
  CHECK(print_tensor(parse_tensor("phi( +a )")) == "phi(+a)");
  const std::string s =
      "[phi(+a -c +b) psi(+c -d)]B xi([-a>B) zeta(<-b +d]B -e)";
  CHECK(print_tensor(parse_tensor(s)) == s);
}

TEST_CASE("parse errors carry spans") {
  for (const char* bad : {"phi(+a", "phi(+)", "[phi(+a)", "phi(+a))", "(",
                          "id(+a)", "phi(+a]A)"}) {
    try {
      parse_tensor(bad);
      FAIL_CHECK("accepted: " << bad);
    } catch (const ParseError& e) {
      CHECK(e.span.start <= e.span.end);
      CHECK(e.span.end <= std::string(bad).size() + 1);
    }
  }
}

TEST_CASE("theory files") {
  TheoryFile tf = parse_theory(
      "theory monoid\n"
      "sym m : v v ^\n"
      "sym eta : ^\n"
      "rule unitL: eta(+e) m(-e -x +a) = id(+a -x)\n"
      "# comment\n"
      "lemma l1: phi(+a) = phi(+a)\n");
  CHECK(tf.name == "monoid");
  CHECK(tf.signature.lookup("m").variable == false);
  CHECK(tf.signature.lookup("m").arrangement == "vv^");
  CHECK(tf.signature.lookup("eta").arrangement == "^");
  REQUIRE(tf.rules.size() == 2);
  CHECK(tf.rules[0].name == "unitL");
  CHECK(!tf.rules[0].is_lemma);
  CHECK(tf.rules[1].is_lemma);

  CHECK(parse_theory("theory empty\n").rules.empty());
  CHECK_THROWS(parse_theory("rule r: 1 = 1\nrule r: 1 = 1\n"));
}

TEST_CASE("json round trip") {
  gen::Rng rng(gen::seed_from_env(21));
  for (int i = 0; i < 100; ++i) {
    Tensor t = gen::random_term(rng);
    PreTensor back = import_json(export_json(t));
    CHECK(back == t.term());
  }
}

TEST_CASE("dot export structure") {
  Tensor t = must_validate(
      parse_tensor("[phi(+a -c +b) psi(+c -d)]B xi([-a>B) zeta(<-b +d]B -e)"));
  std::string dot = export_dot(t);
  CHECK(dot.find("subgraph cluster") != std::string::npos);
  CHECK(dot.find("xi") != std::string::npos);
  CHECK(dot.find("zeta") != std::string::npos);
}

TEST_CASE("parse print round trip on random ASTs") {
  gen::Rng rng(gen::seed_from_env(22));
  for (int i = 0; i < 1000; ++i) {
    PreTensor p = gen::random_term(rng).term();
    CHECK(parse_tensor(print_tensor(p)) == p);
  }
}
