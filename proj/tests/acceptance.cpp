// Acceptance suite: one line per criterion. Arguments select criteria by
// number; without arguments all nine run. The exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "cnfred/combinators.hpp"
#include "cnfred/counting.hpp"
#include "cnfred/reduction.hpp"
#include "cnfred/verification.hpp"
#include "support/elimination.hpp"
#include "support/oracle.hpp"

using namespace cnfred;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kExample2Seconds = 1.0;
constexpr double kExample3Seconds = 10.0;
constexpr double kOracleSeconds = 300.0;
constexpr int kOracleInstances = 500;
constexpr int kWidthInstances = 100;
constexpr int kMaxInputWidth = 6;
constexpr int kPrimalAdditive = 13;
constexpr int kIncidenceAdditive = 14;
constexpr int kBijectionInstances = 50;
constexpr std::uint64_t kBijectionModels = std::uint64_t{1} << 20;
constexpr int kPipelinePairs = 100;
constexpr int kRandomDpInstances = 1000;
constexpr double kExponentTarget = 1.0;
constexpr double kExponentTolerance = 0.1;
constexpr double kWidthStepRatio = 2.2;

const Count kExample2First = 204452, kExample2Second = 204450;
const Count kExample3First = 2110863758, kExample3Second = 2110863756;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string data(const std::string &name) { return std::string(CNFRED_TEST_DATA) + "/" + name; }

Formula example1() { return read_dimacs_file(data("example1.cnf")); }

struct Built {
  Formula f;
  LabeledTreeDecomposition ltd;
  ReductionPair pair;
};

Built build(Variant v, const Formula &f, const TreeDecomposition &td) {
  if (v == Variant::cubic_bipartite) {
    Normalized nm = normalize_3cnf(f, label_td(td, f, false));
    return {nm.formula, nm.ltd, reduce_cubic_bipartite(nm.formula, nm.ltd)};
  }
  LabeledTreeDecomposition ltd = label_td(td, f, v == Variant::monotone);
  return {f, ltd, reduce(v, f, ltd)};
}

const Variant kVariants[] = {Variant::impl, Variant::monotone, Variant::cubic_bipartite};

Outcome golden(const char *variant, const char *td_file, const Count &first, const Count &second, double limit) {
  Outcome o;
  auto t0 = Clock::now();
  fs::path dir = fs::temp_directory_path() / ("cnfred_acceptance_" + std::string(variant));
  fs::remove_all(dir);
  std::string ex = data("example1.cnf"), td = data(td_file), out_dir = dir.string();
  const char *argv[] = {"cnfred", "reduce", ex.c_str(), "--variant", variant, "--td", td.c_str(), "--out", out_dir.c_str()};
  std::ostringstream out, err;
  int code = cli::run(9, argv, out, err);
  if (code != cli::ok && code != cli::failed) return {false, "reduce exited with " + std::to_string(code) + ": " + err.str()};
  Formula psi1 = read_dimacs_file((dir / "psi1.cnf").string());
  Formula psi2 = read_dimacs_file((dir / "psi2.cnf").string());
  TreeDecomposition otd = read_td_file((dir / "out.td").string(), primal_graph(psi1));
  Count c1 = count_treewidth_dp(psi1, otd), c2 = count_treewidth_dp(psi2, otd);
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << "counts " << c1 << " / " << c2 << " (expected " << first << " / " << second << "), difference " << c1 - c2
    << ", " << secs << " s";
  o.pass = c1 == first && c2 == second && c1 - c2 == 2 && secs < limit;
  o.detail = d.str();
  return o;
}

Outcome criterion1() { return golden("impl", "example1_path4.td", kExample2First, kExample2Second, kExample2Seconds); }

Outcome criterion2() { return golden("mon", "example1_path7.td", kExample3First, kExample3Second, kExample3Seconds); }

std::vector<Formula> oracle_corpus() {
  std::mt19937_64 rng(2024);
  std::vector<Formula> corpus;
  for (int i = 0; i < kOracleInstances; ++i) corpus.push_back(testing::random_cnf(rng, {10, 15, 4}));
  return corpus;
}

Outcome criterion3() {
  auto t0 = Clock::now();
  int failures = 0, runs = 0;
  std::string first;
  for (const Formula &f : oracle_corpus()) {
    Count truth = testing::naive_count(f);
    TreeDecomposition td = testing::min_degree_td(primal_graph(f));
    for (Variant v : kVariants) {
      ++runs;
      Built b = build(v, f, td);
      Count got = count_pair(b.pair).difference();
      if (got != truth) {
        if (!failures++) first = std::string(to_string(v)) + " gives " + got.str() + " instead of " + truth.str();
      }
    }
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << runs << " reductions, " << failures << " mismatches, " << secs << " s";
  if (failures) d << "; first: " << first;
  return {failures == 0 && secs < kOracleSeconds, d.str()};
}

Outcome criterion4() {
  int mon = 0, mon_ok = 0, cubic = 0, cubic_ok = 0;
  std::string first;
  for (const Formula &f : oracle_corpus()) {
    TreeDecomposition td = testing::min_degree_td(primal_graph(f));
    Built m = build(Variant::monotone, f, td);
    for (const Formula *psi : {&m.pair.psi1, &m.pair.psi2}) {
      ++mon;
      StructureReport r = audit_structure(*psi, {FragmentTag::mon2, {}, false});
      mon_ok += r.ok;
      if (!r.ok && first.empty()) first = "monotone: " + r.violation;
    }
    Built c = build(Variant::cubic_bipartite, f, td);
    for (const Formula *psi : {&c.pair.psi1, &c.pair.psi2}) {
      ++cubic;
      StructureReport r = audit_structure(*psi, {FragmentTag::impl2, 3, true});
      cubic_ok += r.ok;
      if (!r.ok && first.empty()) first = "cubic: " + r.violation;
    }
  }
  std::ostringstream d;
  d << "mon2 " << mon_ok << "/" << mon << ", impl2+occ<=3+bipartite " << cubic_ok << "/" << cubic;
  if (!first.empty()) d << "; first: " << first;
  return {mon_ok == mon && cubic_ok == cubic, d.str()};
}

Outcome criterion5() {
  std::mt19937_64 rng(5);
  int accepted = 0, violations = 0, max_primal = -100, max_inc = -100, max_mon = -100, max_cubic = -100;
  int drawn = 0;
  std::string first;
  while (accepted < kWidthInstances) {
    ++drawn;
    Formula f = testing::random_cnf(rng, {14, 20, 3});
    TreeDecomposition td = testing::min_degree_td(primal_graph(f));
    TreeDecomposition inc = testing::min_degree_td(incidence_graph(f));
    if (width(td) > kMaxInputWidth || width(inc) > kMaxInputWidth) continue;
    ++accepted;

    LabeledTreeDecomposition ltd = label_td(td, f, false);
    ReductionPair p = reduce_impl(f, ltd);
    WidthReport w = audit_width(ltd, p, p.out_td, kPrimalAdditive);
    max_primal = std::max(max_primal, w.output_width - w.input_width);

    LabeledTreeDecomposition iltd = label_td(inc, f, false, true);
    ReductionPair pi = reduce_impl(f, iltd);
    WidthReport wi = audit_width(iltd, pi, incidence_output_decomposition(pi), kIncidenceAdditive, true);
    max_inc = std::max(max_inc, wi.output_width - wi.input_width);

    for (const WidthReport *r : {&w, &wi})
      if (!r->ok) {
        if (!violations++) first = r->violation;
      }

    // Reported only; see the README for the bounds of these variants.
    Built m = build(Variant::monotone, f, td);
    max_mon = std::max(max_mon, width(m.pair.out_td) - width(td));
    Built c = build(Variant::cubic_bipartite, f, td);
    max_cubic = std::max(max_cubic, width(c.pair.out_td) - 3 * width(td));
  }
  std::ostringstream d;
  d << accepted << " instances (" << drawn << " drawn), " << violations << " violations; max excess primal +"
    << max_primal << " (bound +" << kPrimalAdditive << "), incidence +" << max_inc << " (bound +" << kIncidenceAdditive
    << "); measured monotone w+" << max_mon << ", cubic 3w+" << max_cubic;
  if (violations) d << "; first: " << first;
  return {violations == 0, d.str()};
}

Outcome criterion6() {
  std::mt19937_64 rng(6);
  int done = 0, failures = 0;
  std::uint64_t largest = 0;
  std::string first;
  BijectionOptions opts;
  opts.budget = std::uint64_t{1} << 34;
  while (done < kBijectionInstances) {
    Variant v = kVariants[done % 3];
    Formula f = testing::random_cnf(rng, {3, 3, 3});
    TreeDecomposition td = rng() % 2 ? trivial_td(f) : testing::min_degree_td(primal_graph(f));
    Built b = build(v, f, td);
    PairCounts pc = count_pair(b.pair);
    if (pc.psi1 > kBijectionModels) continue;
    ++done;
    largest = std::max(largest, pc.psi1.convert_to<std::uint64_t>());
    BijectionReport r = check_bijection(b.f, b.pair, b.ltd, opts);
    bool ok = r.ok() && !r.sampled && r.rogue1 == r.rogue2 && r.difference == testing::naive_count(f);
    if (!ok && !failures++) first = std::string(to_string(v)) + ": " + r.failure + "\n" + serialize_dimacs(f);
  }
  std::ostringstream d;
  d << done << " instances, " << failures << " failures, largest model set " << largest;
  if (failures) d << "; first: " << first;
  return {failures == 0, d.str()};
}

Outcome criterion7() {
  std::mt19937_64 rng(7);
  int failures = 0, negative = 0;
  std::string first;
  auto fail = [&](const std::string &what) {
    if (!failures++) first = what;
  };

  for (int i = 0; i < kPipelinePairs; ++i) {
    Formula x = testing::random_mon2(rng, 5, 6), y = testing::random_mon2(rng, 5, 6);
    PipelineCertificate c = single_call_mon(x, y);
    Count cx = testing::naive_count(x), cy = testing::naive_count(y);
    Recovery r = restricted_eval(c.recovery, count_treewidth_dp(c.formulas[0].formula, c.formulas[0].td));
    if (r.first != cx || r.second != cy || r.result != cx - cy) fail("single_mon pair " + std::to_string(i));
    negative += cx < cy;
  }
  int impl_pairs = 0;
  while (impl_pairs < kPipelinePairs) {
    Formula x = testing::random_cubic_impl2(rng, 6, 8), y = testing::random_cubic_impl2(rng, 6, 8);
    // A clauseless second operand over m variables has 2^m models and no room below the multiplier.
    if (y.clauses.empty() && y.num_vars >= x.num_vars) continue;
    ++impl_pairs;
    PipelineCertificate c = single_call_impl(x, y);
    Count cx = testing::naive_count(x), cy = testing::naive_count(y);
    Recovery r = restricted_eval(c.recovery, count_treewidth_dp(c.formulas[0].formula, c.formulas[0].td));
    if (r.first != cx || r.second != cy || r.result != cx - cy) fail("single_impl pair " + std::to_string(impl_pairs));
    negative += cx < cy;
  }
  auto dp = [](const Decomposed &d) { return count_treewidth_dp(d.formula, d.td); };
  for (int i = 0; i < kPipelinePairs; ++i) {
    Formula x = testing::random_cnf(rng, {7, 8, 3}), y = testing::random_cnf(rng, {7, 8, 3});
    TwoCall t = gapp_impl_two_call(x, y);
    if (dp(t.first) - dp(t.second) != testing::naive_count(x) - testing::naive_count(y))
      fail("gapp_impl pair " + std::to_string(i));
  }
  for (int i = 0; i < kPipelinePairs; ++i) {
    Formula x = testing::random_cnf(rng, {7, 8, 3}), y = testing::random_cnf(rng, {7, 8, 3});
    TwoCall t = gapp_mon_two_call(x, y);
    if (dp(t.first) - dp(t.second) != testing::naive_count(x) - testing::naive_count(y))
      fail("gapp_mon pair " + std::to_string(i));
  }
  for (int i = 0; i < kPipelinePairs; ++i) {
    Formula x = testing::random_impl2(rng, 7, 8), y = testing::random_impl2(rng, 7, 8);
    DnfPad pad = dnf_pad_two_call({x, trivial_td(x)}, {y, trivial_td(y)});
    PipelineCertificate c = two_call_certificate(pad);
    Count n1 = testing::naive_count(c.formulas[0].formula), n2 = testing::naive_count(c.formulas[1].formula);
    Count full = Count(1) << pad.n_first;
    Count value = (full - n1) - (full - n2);
    Recovery r = restricted_eval(c.recovery, std::vector<Count>{n1, n2});
    Count truth = testing::naive_count(x) - testing::naive_count(y);
    if (pad.n_first != pad.n_second || value != truth || r.result != truth) fail("dnf_pad pair " + std::to_string(i));
  }
  std::ostringstream d;
  d << "5 pipelines x " << kPipelinePairs << " pairs, " << failures << " failures, " << negative
    << " single-call pairs with a negative difference";
  if (failures) d << "; first: " << first;
  return {failures == 0, d.str()};
}

Outcome criterion8() {
  int checked = 0, failures = 0;
  std::string first;
  auto check = [&](const Formula &f) {
    ++checked;
    Count brute = count_bruteforce(f);
    Count a = count_treewidth_dp(f, testing::min_degree_td(primal_graph(f)));
    Count b = count_treewidth_dp(f, trivial_td(f));
    if ((a != brute || b != brute) && !failures++) first = serialize_dimacs(f);
  };

  for (int n = 0; n <= 4; ++n) {
    std::vector<std::vector<int>> pool;
    for (int v = 1; v <= n; ++v) {
      pool.push_back({v});
      pool.push_back({-v});
      for (int u = v + 1; u <= n; ++u)
        for (int sv : {1, -1})
          for (int su : {1, -1}) pool.push_back({sv * v, su * u});
    }
    int p = static_cast<int>(pool.size());
    // Every set of at most four distinct clauses.
    std::vector<int> pick;
    std::function<void(int)> rec = [&](int from) {
      Formula f(n);
      for (int i : pick) f.add(pool[i]);
      check(f);
      if (pick.size() == 4) return;
      for (int i = from; i < p; ++i) {
        pick.push_back(i);
        rec(i + 1);
        pick.pop_back();
      }
    };
    rec(0);
  }
  int exhaustive = checked;

  std::mt19937_64 rng(8);
  for (int i = 0; i < kRandomDpInstances; ++i) {
    Formula f = testing::random_cnf(rng, {14, 24, 4});
    if (i % 4 == 3) f = dualize(f);
    check(f);
  }
  std::ostringstream d;
  d << exhaustive << " exhaustive + " << checked - exhaustive << " random instances, " << failures << " mismatches";
  if (failures) d << "; first:\n" << first;
  return {failures == 0, d.str()};
}

// Clauses over each window of w+1 consecutive variables; the path of windows
// is a decomposition of width w.
std::pair<Formula, TreeDecomposition> band(std::mt19937_64 &rng, int n, int w) {
  Formula f(n);
  TreeDecomposition td;
  int parent = -1;
  for (int i = 1; i + w <= n; ++i) {
    std::vector<int> clause, bag;
    for (int v = i; v <= i + w; ++v) {
      clause.push_back(rng() % 2 ? v : -v);
      bag.push_back(v);
    }
    f.add(clause);
    parent = td.add_node(bag, parent);
  }
  return {f, td};
}

Outcome criterion9() {
  std::mt19937_64 rng(9);
  const int w = 3;
  std::vector<double> xs, ys;
  for (int n : {100, 200, 400, 800, 1600, 3200}) {
    auto [f, td] = band(rng, n, w);
    DpStats st;
    count_treewidth_dp(f, td, &st);
    xs.push_back(std::log(static_cast<double>(f.size())));
    ys.push_back(std::log(static_cast<double>(st.ops)));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  double slope = sxy / sxx;

  // Same number of literals at widths w and w+1.
  const int literals = 4000;
  double worst = 0;
  for (int k = 1; k <= 6; ++k) {
    auto [f1, td1] = band(rng, literals / (k + 1) + k, k);
    auto [f2, td2] = band(rng, literals / (k + 2) + k + 1, k + 1);
    DpStats s1, s2;
    count_treewidth_dp(f1, td1, &s1);
    count_treewidth_dp(f2, td2, &s2);
    worst = std::max(worst, static_cast<double>(s2.ops) / static_cast<double>(s1.ops));
  }
  std::ostringstream d;
  d << "exponent " << slope << " (target " << kExponentTarget << " +- " << kExponentTolerance
    << "), worst w->w+1 ratio " << worst << " (limit " << kWidthStepRatio << ")";
  return {std::abs(slope - kExponentTarget) <= kExponentTolerance && worst <= kWidthStepRatio, d.str()};
}

} // namespace

int main(int argc, char **argv) {
  std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                     criterion6, criterion7, criterion8, criterion9};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << argv[i] << '\n';
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty())
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);

  int failed = 0;
  for (int k : selected) {
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
  }
  return failed;
}
