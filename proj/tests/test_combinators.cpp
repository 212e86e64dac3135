#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cnfred/combinators.hpp"
#include "cnfred/errors.hpp"
#include "cnfred/verification.hpp"
#include "support/oracle.hpp"

using namespace cnfred;

namespace {

Formula example1() { return parse_dimacs("p cnf 3 3\n-1 2 3 0\n1 -2 3 0\n-3 0\n"); }

Formula with_gadget(int n, const SwitchGadget &g) {
  Formula f(n);
  for (const Clause &c : g.clauses) f.add_clause(c);
  return f;
}

Count dp(const Decomposed &d) { return count_treewidth_dp(d.formula, d.td); }

// Counts through brute force when the formula is small enough.
Count count_either(const Decomposed &d) {
  if (d.formula.num_vars <= 20) {
    Count c = testing::naive_count(d.formula);
    CHECK(dp(d) == c);
    return c;
  }
  return dp(d);
}

bool cubic_ok(const Formula &f) {
  return audit_structure(f, {FragmentTag::impl2, 3, true}).ok;
}

} // namespace

TEST_CASE("switch gadget", "[combinators]") {
  SwitchGadget g = make_switch({1}, {2}, 3);
  CHECK(g.kind == SwitchKind::plain);
  CHECK(g.fresh_vars == std::vector<int>{3});
  REQUIRE(g.clauses.size() == 2);
  CHECK(g.clauses[0] == Clause{Literal::neg(3), Literal::pos(1)});
  CHECK(g.clauses[1] == Clause{Literal::neg(2), Literal::pos(3)});
  // s=1 leaves b free with a=1, s=0 leaves a free with b=0.
  CHECK(testing::naive_count(with_gadget(3, g)) == 4);
  CHECK_THROWS_AS(make_switch({1, 2}, {2}, 3), PreconditionError);
  CHECK_THROWS_AS(make_switch({1}, {2}, 1), PreconditionError);
}

TEST_CASE("monswitch and relswitch", "[combinators]") {
  SwitchGadget m = monswitch({1}, {1}, {1}, 2);
  CHECK(m.kind == SwitchKind::monswitch);
  CHECK(m.clauses.empty());
  CHECK(m.fresh_vars == std::vector<int>{2, 3});
  CHECK_THROWS_AS(monswitch({4}, {1}, {1, 2}, 5), PreconditionError);

  // kappa over {1,2,3}; iota = {1}, tau = {2,3}.
  SwitchGadget m2 = monswitch({1}, {2, 3}, {1, 2, 3}, 4);
  CHECK(m2.clauses.size() == 3);
  CHECK(classify_fragment(with_gadget(5, m2)) == FragmentTag::mon2);

  SwitchGadget r = relswitch({1}, {2}, 3);
  CHECK(r.clauses.size() == 2);
  CHECK(testing::naive_count(with_gadget(3, r)) == 5);
  CHECK(testing::naive_count(with_gadget(1, relswitch({}, {}, 1))) == 2);
  CHECK_THROWS_AS(relswitch({1}, {1}, 2), PreconditionError);
}

TEST_CASE("cycswitch", "[combinators]") {
  Formula a(2), b(2);
  a.add({-1, 2});
  b.add({-2, 1});
  CycSwitch cs = cycswitch({a, trivial_td(a)}, {b, trivial_td(b)});
  CHECK(cs.gadget.kind == SwitchKind::cycswitch);
  CHECK(cubic_ok(cs.combined.formula));
  CHECK_FALSE(validation_error(cs.combined.td, primal_graph(cs.combined.formula)).has_value());
  // With no bits the selector picks one side: #b + #a.
  CHECK(count_either(cs.combined) == 6);

  Formula empty(1);
  CycSwitch ce = cycswitch({a, trivial_td(a)}, {empty, trivial_td(empty)});
  CHECK(cubic_ok(ce.combined.formula));
  CHECK(count_either(ce.combined) == 3 + 2);

  Formula triangle(3);
  triangle.add({-1, 2});
  triangle.add({-2, 3});
  triangle.add({-3, 1});
  CHECK_THROWS_AS(cycswitch({triangle, trivial_td(triangle)}, {a, trivial_td(a)}), PreconditionError);
  Formula mixed(2);
  mixed.add({1, 2});
  CHECK_THROWS_AS(cycswitch({mixed, trivial_td(mixed)}, {a, trivial_td(a)}), PreconditionError);

  std::mt19937_64 rng(41);
  for (int i = 0; i < 40; ++i) {
    Formula x = testing::random_cubic_impl2(rng, 6, 8), y = testing::random_cubic_impl2(rng, 6, 8);
    int bits = static_cast<int>(rng() % 3);
    CycSwitch e = extcycswitch(bits, {x, trivial_td(x)}, {y, trivial_td(y)});
    CHECK(cubic_ok(e.combined.formula));
    Count expected = testing::naive_count(y) + (Count(1) << bits) * testing::naive_count(x);
    CHECK(count_either(e.combined) == expected);
  }
}

TEST_CASE("gapp_impl_two_call", "[combinators]") {
  Formula a(1);
  a.add({1});
  TwoCall t = gapp_impl_two_call(example1(), a);
  CHECK(classify_fragment(t.first.formula) == FragmentTag::impl2);
  CHECK(classify_fragment(t.second.formula) == FragmentTag::impl2);
  CHECK(dp(t.first) - dp(t.second) == 1);

  TwoCall same = gapp_impl_two_call(example1(), example1());
  CHECK(dp(same.first) - dp(same.second) == 0);

  std::mt19937_64 rng(42);
  for (int i = 0; i < 40; ++i) {
    Formula x = testing::random_cnf(rng, {7, 8, 3}), y = testing::random_cnf(rng, {7, 8, 3});
    TwoCall c = gapp_impl_two_call(x, y);
    CHECK(dp(c.first) - dp(c.second) == testing::naive_count(x) - testing::naive_count(y));
  }
}

TEST_CASE("gapp_mon_two_call", "[combinators]") {
  Formula unsat(1);
  unsat.add({1});
  unsat.add({-1});
  TwoCall t = gapp_mon_two_call(example1(), unsat);
  CHECK(classify_fragment(t.first.formula) == FragmentTag::mon2);
  CHECK(classify_fragment(t.second.formula) == FragmentTag::mon2);
  CHECK(dp(t.first) - dp(t.second) == 2);

  TwoCall same = gapp_mon_two_call(example1(), example1());
  CHECK(dp(same.first) - dp(same.second) == 0);

  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    Formula x = testing::random_cnf(rng, {5, 6, 3}), y = testing::random_cnf(rng, {5, 6, 3});
    TwoCall c = gapp_mon_two_call(x, y);
    CHECK(dp(c.first) - dp(c.second) == testing::naive_count(x) - testing::naive_count(y));
  }
}

TEST_CASE("gapp_cubic_two_call", "[combinators]") {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 10; ++i) {
    Formula x = testing::random_cnf(rng, {5, 6, 3}), y = testing::random_cnf(rng, {5, 6, 3});
    TwoCall c = gapp_cubic_two_call(x, y);
    CHECK(cubic_ok(c.first.formula));
    CHECK(cubic_ok(c.second.formula));
    CHECK(dp(c.first) - dp(c.second) == testing::naive_count(x) - testing::naive_count(y));
  }
}

TEST_CASE("dnf_pad_two_call", "[combinators]") {
  auto identity = [](const Formula &x, const Formula &y) {
    DnfPad pad = dnf_pad_two_call({x, trivial_td(x)}, {y, trivial_td(y)});
    REQUIRE(pad.n_first == pad.n_second);
    CHECK(pad.first.formula.num_vars == pad.n_first);
    CHECK(classify_fragment(pad.first.formula) == FragmentTag::impl2);
    Count full = Count(1) << pad.n_first;
    Count neg1 = testing::naive_count(dualize(pad.first.formula));
    Count neg2 = testing::naive_count(dualize(pad.second.formula));
    CHECK(testing::naive_count(pad.first.formula) == testing::naive_count(x) + 1);
    CHECK(testing::naive_count(pad.second.formula) == testing::naive_count(y) + 1);
    Count value = (full - neg1) - (full - neg2);
    CHECK(value == testing::naive_count(x) - testing::naive_count(y));

    PipelineCertificate cert = two_call_certificate(pad);
    CHECK(cert.formulas[0].formula.polarity == Polarity::dnf);
    Recovery r = restricted_eval(cert.recovery, std::vector<Count>{neg1, neg2});
    CHECK(r.result == value);
  };

  Formula two(2), three(3);
  two.add({-1, 2});
  three.add({-1, 2});
  three.add({-2, 3});
  identity(two, three);
  identity(three, two);
  identity(two, two);

  std::mt19937_64 rng(45);
  for (int i = 0; i < 100; ++i) identity(testing::random_impl2(rng, 7, 8), testing::random_impl2(rng, 7, 8));

  CHECK_THROWS_AS(dnf_pad_two_call({example1(), trivial_td(example1())}, {two, trivial_td(two)}),
                  PreconditionError);
}

TEST_CASE("restricted_eval", "[combinators]") {
  PipelineCertificate mon = single_call_mon(Formula(2), Formula(2));
  Program tc0 = mon.recovery;
  REQUIRE(tc0.circuit == Circuit::tc0);
  Program tc0_m5 = tc0;
  for (Instr &in : tc0_m5.code)
    if (in.op == Op::mask || in.op == Op::shr) in.b = 5;
  Recovery r = restricted_eval(tc0_m5, Count(291));
  CHECK(r.first == 3);
  CHECK(r.second == 3);
  CHECK(r.result == 0);

  Program ac0 = single_call_impl(Formula(1), parse_dimacs("p cnf 4 1\n-1 2 0\n")).recovery;
  REQUIRE(ac0.circuit == Circuit::ac0);
  Recovery s = restricted_eval(ac0, Count(35));
  CHECK(s.first == 2);
  CHECK(s.second == 3);
  CHECK(s.result == -1);

  Program bad = ac0;
  bad.code.push_back({Op::div, 1, 2});
  CHECK_THROWS_AS(restricted_eval(bad, Count(35)), PreconditionError);

  // #phi2 = 0 leaves nothing to divide by.
  CHECK_THROWS(restricted_eval(tc0_m5, Count(0)));
}

TEST_CASE("single_call_mon", "[combinators]") {
  Formula ab(2);
  ab.add({1, 2});
  PipelineCertificate cert = single_call_mon(ab, ab);
  CHECK(cert.m == 5);
  REQUIRE(cert.formulas.size() == 1);
  CHECK(classify_fragment(cert.formulas[0].formula) == FragmentTag::mon2);
  Count alpha = count_either(cert.formulas[0]);
  CHECK(alpha == 291);
  Recovery r = restricted_eval(cert.recovery, alpha);
  CHECK(r.first == 3);
  CHECK(r.second == 3);

  PipelineCertificate free = single_call_mon(Formula(1), Formula(1));
  CHECK(free.m == 3);
  CHECK(count_either(free.formulas[0]) == 34);
  CHECK(restricted_eval(free.recovery, Count(34)).result == 0);

  std::mt19937_64 rng(46);
  for (int i = 0; i < 50; ++i) {
    Formula x = testing::random_mon2(rng, 5, 6), y = testing::random_mon2(rng, 5, 6);
    PipelineCertificate c = single_call_mon(x, y);
    Count cx = testing::naive_count(x), cy = testing::naive_count(y);
    Count a = count_either(c.formulas[0]);
    CHECK(a == cy + cx * cy * (Count(1) << c.m));
    CHECK((a & ((Count(1) << c.m) - 1)) == cy);
    CHECK((a >> c.m) == cx * cy);
    Recovery rec = restricted_eval(c.recovery, a);
    CHECK(rec.first == cx);
    CHECK(rec.second == cy);
    CHECK(rec.result == cx - cy);
  }
}

TEST_CASE("single_call_impl", "[combinators]") {
  Formula cycle(4), one(2);
  cycle.add({-1, 2});
  cycle.add({-2, 3});
  cycle.add({-3, 4});
  cycle.add({-4, 1});
  one.add({-1, 2});
  PipelineCertificate cert = single_call_impl(cycle, one);
  CHECK(cert.m == 4);
  CHECK(cubic_ok(cert.formulas[0].formula));
  Count alpha = count_either(cert.formulas[0]);
  CHECK(alpha == 35);
  Recovery r = restricted_eval(cert.recovery, alpha);
  CHECK(r.first == 2);
  CHECK(r.second == 3);

  PipelineCertificate same = single_call_impl(one, one);
  CHECK(restricted_eval(same.recovery, count_either(same.formulas[0])).result == 0);

  Formula triangle(3);
  triangle.add({-1, 2});
  triangle.add({-2, 3});
  triangle.add({-3, 1});
  CHECK_THROWS_AS(single_call_impl(triangle, one), PreconditionError);

  std::mt19937_64 rng(47);
  for (int i = 0; i < 50; ++i) {
    Formula x = testing::random_cubic_impl2(rng, 6, 8), y = testing::random_cubic_impl2(rng, 6, 8);
    if (y.clauses.empty() && y.num_vars >= x.num_vars) continue;
    PipelineCertificate c = single_call_impl(x, y);
    Count cx = testing::naive_count(x), cy = testing::naive_count(y);
    Count a = count_either(c.formulas[0]);
    CHECK(a == cy + (Count(1) << c.m) * cx);
    Recovery rec = restricted_eval(c.recovery, a);
    CHECK(rec.first == cx);
    CHECK(rec.second == cy);
    CHECK(rec.result == cx - cy);
  }
}

TEST_CASE("certificate_json", "[combinators]") {
  Formula ab(2);
  ab.add({1, 2});
  PipelineCertificate cert = single_call_mon(ab, ab);
  std::string j = certificate_json(cert, {"combined.cnf"});
  CHECK(j.find("single_mon") != std::string::npos);
  CHECK(j.find("combined.cnf") != std::string::npos);
  CHECK(j.find("DIV") != std::string::npos);
}
