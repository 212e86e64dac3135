#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "cnfred/counting.hpp"
#include "cnfred/errors.hpp"
#include "cnfred/formula.hpp"
#include "support/oracle.hpp"

using namespace cnfred;

namespace {

const char *kExample1 = "p cnf 3 3\n-1 2 3 0\n1 -2 3 0\n-3 0\n";

ParseErrorKind parse_error_kind(const std::string &text) {
  try {
    parse_dimacs(text);
  } catch (const ParseError &e) {
    return e.kind();
  }
  FAIL("no parse error for: " << text);
  return ParseErrorKind::bad_token;
}

} // namespace

TEST_CASE("parse_dimacs reads Example 1", "[formula]") {
  Formula f = parse_dimacs(kExample1);
  CHECK(f.num_vars == 3);
  REQUIRE(f.clauses.size() == 3);
  CHECK(f.clauses[0] == Clause{Literal::neg(1), Literal::pos(2), Literal::pos(3)});
  CHECK(f.clauses[1] == Clause{Literal::pos(1), Literal::neg(2), Literal::pos(3)});
  CHECK(f.clauses[2] == Clause{Literal::neg(3)});
}

TEST_CASE("parse_dimacs edge cases", "[formula]") {
  SECTION("empty instance") {
    Formula f = parse_dimacs("p cnf 0 0\n");
    CHECK(f.num_vars == 0);
    CHECK(f.clauses.empty());
  }
  SECTION("comments are ignored") {
    Formula f = parse_dimacs("c hello\np cnf 2 1\nc mid\n1 -2 0\n");
    CHECK(f.clauses.size() == 1);
  }
  SECTION("duplicate literals collapse") {
    Formula f = parse_dimacs("p cnf 2 1\n1 1 -2 0\n");
    CHECK(f.clauses[0].size() == 2);
  }
  SECTION("distinct error kinds") {
    CHECK(parse_error_kind("p cnf 2 1\n1 -1 0\n") == ParseErrorKind::tautology);
    CHECK(parse_error_kind("p cnf x 1\n1 0\n") == ParseErrorKind::malformed_header);
    CHECK(parse_error_kind("p cnf 2 1\n3 0\n") == ParseErrorKind::literal_out_of_range);
    CHECK(parse_error_kind("p cnf 2 1\n1 2\n") == ParseErrorKind::truncated_clause);
  }
  SECTION("in-memory tautologies are rejected too") {
    Formula f(2);
    CHECK_THROWS(f.add({1, -1}));
    CHECK_THROWS(f.add({3}));
  }
}

TEST_CASE("serialize_dimacs", "[formula]") {
  CHECK(serialize_dimacs(parse_dimacs(kExample1)) == kExample1);
  CHECK(serialize_dimacs(Formula{}) == "p cnf 0 0\n");

  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    Formula f = testing::random_cnf(rng, {8, 12, 4});
    Formula g = parse_dimacs(serialize_dimacs(f));
    CHECK(same_up_to_order(f, g));
    CHECK(g == f);
  }
}

TEST_CASE("same_up_to_order ignores clause and literal order", "[formula]") {
  Formula a = parse_dimacs("p cnf 3 2\n1 2 0\n-3 1 0\n");
  Formula b = parse_dimacs("p cnf 3 2\n1 -3 0\n2 1 0\n");
  CHECK(same_up_to_order(a, b));
  CHECK_FALSE(a == b);
}

TEST_CASE("primal and incidence graphs", "[formula]") {
  Formula f = parse_dimacs(kExample1);
  Graph p = primal_graph(f);
  CHECK(p.num_vertices == 3);
  CHECK(p.edges == std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}});

  Graph inc = incidence_graph(f);
  CHECK(inc.num_vertices == 6);
  CHECK(inc.edges.size() == 7);
  CHECK(inc.kind[4] == VertexKind::clause);
  CHECK(inc.has_edge(3, 6));
  CHECK_FALSE(inc.has_edge(1, 6));

  Formula units = parse_dimacs("p cnf 3 3\n1 0\n-2 0\n3 0\n");
  CHECK(primal_graph(units).edges.empty());

  Formula clique(4);
  clique.add({1, -2, 3, 4});
  CHECK(primal_graph(clique).edges.size() == 6);

  CHECK(incidence_graph(Formula{}).num_vertices == 0);
  Formula unit(1);
  unit.add({1});
  CHECK(incidence_graph(unit).edges.size() == 1);

  // Clause order does not change the primal graph.
  Formula shuffled(3);
  shuffled.add({-3});
  shuffled.add({1, -2, 3});
  shuffled.add({-1, 2, 3});
  CHECK(primal_graph(shuffled).edges == p.edges);
}

TEST_CASE("classify_fragment", "[formula]") {
  auto tag = [](const char *text) { return classify_fragment(parse_dimacs(text)); };
  CHECK(tag("p cnf 3 2\n1 2 0\n2 3 0\n") == FragmentTag::mon2);
  CHECK(tag("p cnf 3 2\n-1 2 0\n-2 3 0\n") == FragmentTag::impl2);
  CHECK(tag(kExample1) == FragmentTag::cnf3);
  CHECK(tag("p cnf 3 2\n1 2 0\n-2 3 0\n") == FragmentTag::horn2);
  CHECK(tag("p cnf 3 2\n-1 -2 0\n2 3 0\n") == FragmentTag::two_cnf);
  CHECK(tag("p cnf 4 1\n1 2 3 4 0\n") == FragmentTag::general);
  // A fact breaks mon2 and impl2.
  CHECK(tag("p cnf 2 2\n1 2 0\n1 0\n") == FragmentTag::horn2);
}

TEST_CASE("dualize", "[formula]") {
  Formula f(2);
  f.add({1, 2});
  Formula d = dualize(f);
  CHECK(d.polarity == Polarity::dnf);
  CHECK(d.clauses[0] == Clause{Literal::neg(1), Literal::neg(2)});
  CHECK(testing::naive_count(d) == 1);
  CHECK(count_bruteforce(d) == 1);
  CHECK(dualize(d) == f);

  Formula empty(0);
  CHECK(testing::naive_count(empty) == 1);
  CHECK(testing::naive_count(dualize(empty)) == 0);
  CHECK(count_bruteforce(dualize(empty)) == 0);

  CHECK(classify_fragment(dualize(parse_dimacs("p cnf 2 1\n1 2 0\n"))) == FragmentTag::mon2dnf);
  CHECK(classify_fragment(dualize(parse_dimacs("p cnf 2 1\n-1 2 0\n"))) == FragmentTag::zero_one_2dnf);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    Formula g = testing::random_cnf(rng, {10, 12, 4});
    Count total = Count(1) << g.num_vars;
    CHECK(testing::naive_count(g) + testing::naive_count(dualize(g)) == total);
    CHECK(count_bruteforce(g) + count_bruteforce(dualize(g)) == total);
  }
}

TEST_CASE("disjoint_union shifts the right operand", "[formula]") {
  Formula a = parse_dimacs("p cnf 2 1\n1 -2 0\n");
  Formula b = parse_dimacs("p cnf 2 1\n-1 2 0\n");
  Formula u = disjoint_union(a, b);
  CHECK(u.num_vars == 4);
  CHECK(u.clauses[1] == Clause{Literal::neg(3), Literal::pos(4)});
  CHECK(testing::naive_count(u) == testing::naive_count(a) * testing::naive_count(b));
  CHECK(occurrences(u) == std::vector<int>{0, 1, 1, 1, 1});
}
