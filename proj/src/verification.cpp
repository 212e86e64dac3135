#include "cnfred/verification.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <utility>

#include "json.hpp"

#include "cnfred/errors.hpp"

namespace cnfred {

std::vector<int> Model::true_vars() const {
  std::vector<int> out;
  for (int v = 1; v <= num_vars(); ++v)
    if (value[v]) out.push_back(v);
  return out;
}

bool satisfies(const Formula &f, const Model &m) {
  auto lit = [&](Literal l) { return m.contains(l.var) != l.negative; };
  if (f.polarity == Polarity::dnf) {
    for (const auto &c : f.clauses)
      if (std::all_of(c.begin(), c.end(), lit)) return true;
    return false;
  }
  for (const auto &c : f.clauses)
    if (!std::any_of(c.begin(), c.end(), lit)) return false;
  return true;
}

std::string to_string(const Model &m) {
  std::string s;
  for (int v : m.true_vars()) {
    if (!s.empty()) s += ' ';
    s += std::to_string(v);
  }
  return s;
}

namespace {

class Search {
public:
  Search(const Formula &f, std::uint64_t budget) : f_(f), budget_(budget) {
    if (f.polarity != Polarity::cnf) throw PreconditionError("model enumeration needs a CNF");
    val_.assign(f.num_vars + 1, -1);
    against_.assign(2 * (f.num_vars + 1), {});
    for (int c = 0; c < static_cast<int>(f.clauses.size()); ++c)
      for (Literal l : f.clauses[c]) against_[index(~l)].push_back(c);
  }

  std::uint64_t probes() const { return probes_; }

  // Calls found(model) for every model in lexicographic order.
  template <class F> void enumerate(F &&found) {
    if (!initial()) return;
    descend(1, found, nullptr);
  }

  // Finds one model with random branching; false when none is reachable.
  bool sample(std::mt19937_64 &rng, Model &out) {
    std::fill(val_.begin(), val_.end(), -1);
    trail_.clear();
    if (!initial()) return false;
    bool got = false;
    auto found = [&](const Model &m) {
      out = m;
      got = true;
    };
    descend(1, found, &rng);
    return got;
  }

private:
  static int index(Literal l) { return 2 * l.var + (l.negative ? 1 : 0); }

  bool initial() {
    for (const auto &c : f_.clauses) {
      if (c.empty()) return false;
      if (c.size() == 1 && !assign(c[0])) return false;
    }
    return true;
  }

  // Sets l true and propagates units; false on conflict.
  bool assign(Literal l) {
    std::vector<Literal> queue{l};
    while (!queue.empty()) {
      Literal p = queue.back();
      queue.pop_back();
      int cur = val_[p.var];
      if (cur >= 0) {
        if (cur != (p.negative ? 0 : 1)) return false;
        continue;
      }
      if (++probes_ > budget_) throw LimitError("model enumeration exceeded the probe budget");
      val_[p.var] = p.negative ? 0 : 1;
      trail_.push_back(p.var);
      for (int c : against_[index(p)]) {
        Literal unit{};
        int open = 0;
        bool sat = false;
        for (Literal q : f_.clauses[c]) {
          int v = val_[q.var];
          if (v < 0) {
            ++open;
            unit = q;
          } else if (v != (q.negative ? 1 : 0)) {
            sat = true;
            break;
          }
        }
        if (sat) continue;
        if (open == 0) return false;
        if (open == 1) queue.push_back(unit);
      }
    }
    return true;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      val_[trail_.back()] = -1;
      trail_.pop_back();
    }
  }

  // Returns true to stop (sampling found a model).
  template <class F> bool descend(int v, F &found, std::mt19937_64 *rng) {
    while (v <= f_.num_vars && val_[v] >= 0) ++v;
    if (v > f_.num_vars) {
      Model m(f_.num_vars);
      for (int u = 1; u <= f_.num_vars; ++u) m.set(u, val_[u] == 1);
      found(m);
      return rng != nullptr;
    }
    int first = rng ? static_cast<int>((*rng)() & 1) : 0;
    for (int k = 0; k < 2; ++k) {
      int b = first ^ k;
      std::size_t mark = trail_.size();
      bool ok = assign(Literal{v, b == 0});
      if (ok && descend(v + 1, found, rng)) return true;
      undo(mark);
    }
    return false;
  }

  const Formula &f_;
  std::uint64_t budget_;
  std::uint64_t probes_ = 0;
  std::vector<int> val_;
  std::vector<int> trail_;
  std::vector<std::vector<int>> against_;
};

} // namespace

std::vector<Model> enumerate_models(const Formula &f, std::uint64_t budget, std::uint64_t *probes) {
  Search s(f, budget);
  std::vector<Model> out;
  try {
    s.enumerate([&](const Model &m) { out.push_back(m); });
  } catch (...) {
    if (probes) *probes = s.probes();
    throw;
  }
  if (probes) *probes = s.probes();
  return out;
}

std::vector<Model> sample_models(const Formula &f, int count, std::uint64_t seed, std::uint64_t budget) {
  Search s(f, budget);
  std::mt19937_64 rng(seed);
  std::vector<Model> out;
  try {
    for (int i = 0; i < count; ++i) {
      Model m;
      if (!s.sample(rng, m)) break;
      out.push_back(std::move(m));
    }
  } catch (const LimitError &) {
  }
  return out;
}

const char *to_string(RogueCondition c) {
  switch (c) {
  case RogueCondition::none: return "none";
  case RogueCondition::i: return "i";
  case RogueCondition::ii: return "ii";
  case RogueCondition::iii: return "iii";
  case RogueCondition::iiib: return "iiib";
  case RogueCondition::iv: return "iv";
  }
  return "?";
}

namespace {

bool mono(const ReductionPair &p) { return p.variant == Variant::monotone; }
bool cubic(const ReductionPair &p) { return p.variant == Variant::cubic_bipartite; }

// Case variables and x are stored negated in the monotone variant.
bool taken(const Model &m, const ReductionPair &p, int var) {
  return var != 0 && m.contains(var) != mono(p);
}

bool x_taken(const Model &m, const ReductionPair &p) { return taken(m, p, p.registry.x); }

int count_in(const Model &m, std::initializer_list<int> vars) {
  int k = 0;
  for (int v : vars) k += v != 0 && m.contains(v);
  return k;
}

// A copy chain a -> a' -> a'' must be all false or all true.
bool chain_broken(const Model &m, int a, int a1, int a2) {
  if (!a1) return false;
  int k = count_in(m, {a, a1, a2});
  return k != 0 && k != 3;
}

// The variable pair (alpha, alpha bar) a node's case clauses refer to.
std::pair<int, int> node_alpha(const ReductionPair &p, const LabeledTreeDecomposition &ltd, int t) {
  const Label &lab = ltd.label[t];
  if (ltd.is_leaf(t) || ltd.is_join(t)) return {0, 0};
  if (lab.kind == Label::Kind::clause) return {p.registry.chosen[lab.index], p.registry.unchosen[lab.index]};
  if (lab.kind == Label::Kind::variable && mono(p)) return {lab.index, p.registry.var_bar[lab.index]};
  return {0, 0};
}

std::vector<bool> rogue_nodes(const Model &m, const ReductionPair &p, const LabeledTreeDecomposition &ltd) {
  std::vector<bool> out(ltd.size());
  for (int t = 0; t < ltd.size(); ++t) out[t] = !rogue_conditions_at(m, p, ltd, t).empty();
  return out;
}

// Topmost rogue node on the lexicographically smallest root-to-leaf path
// carrying one, or -1.
int pick_node(const std::vector<bool> &rogue, const LabeledTreeDecomposition &ltd) {
  auto rank = root_to_leaf_rank(ltd);
  int best = -1;
  for (int t = 0; t < ltd.size(); ++t)
    if (rogue[t] && (best < 0 || rank[t] < best)) best = rank[t];
  if (best < 0) return -1;
  int u = ltd.leaves()[best];
  int top = -1;
  for (; u >= 0; u = ltd.base.parent[u])
    if (rogue[u]) top = u;
  return top;
}

void swap_values(Model &m, int a, int b) {
  if (a == 0 || b == 0) return;
  std::swap(m.value[a], m.value[b]);
}

} // namespace

std::vector<RogueCondition> rogue_conditions_at(const Model &m, const ReductionPair &p,
                                                const LabeledTreeDecomposition &ltd, int t) {
  const auto &r = p.registry;
  std::vector<RogueCondition> out;
  if (!x_taken(m, p)) out.push_back(RogueCondition::i);

  int cases = 0, present = 0;
  for (int v : {r.o1[t], r.o2[t], r.e1[t], r.e2[t]}) {
    present += v != 0;
    cases += taken(m, p, v);
  }
  if (present > 0 && cases != 1) out.push_back(RogueCondition::ii);

  auto [alpha, alpha_bar] = node_alpha(p, ltd, t);
  if (alpha) {
    bool bad = count_in(m, {alpha, alpha_bar}) != 1;
    const Label &lab = ltd.label[t];
    if (cubic(p) && lab.kind == Label::Kind::clause) {
      int c = lab.index;
      bad = bad || chain_broken(m, r.chosen[c], r.chosen1[c], r.chosen2[c]) ||
            chain_broken(m, r.unchosen[c], r.unchosen1[c], r.unchosen2[c]);
    }
    if (bad) out.push_back(RogueCondition::iii);
    if (mono(p) && lab.kind == Label::Kind::variable && m.contains(r.top[lab.index]) &&
        m.contains(r.bot[lab.index]))
      out.push_back(RogueCondition::iiib);
  }

  bool bad = count_in(m, {r.o[t], r.e[t]}) != 1;
  if (cubic(p))
    bad = bad || chain_broken(m, r.o[t], r.o_1[t], r.o_2[t]) || chain_broken(m, r.e[t], r.e_1[t], r.e_2[t]);
  if (bad) out.push_back(RogueCondition::iv);
  return out;
}

RogueVerdict classify_rogue(const Model &m, const ReductionPair &p, const LabeledTreeDecomposition &ltd) {
  if (m.num_vars() != p.psi1.num_vars) throw PreconditionError("model has the wrong number of variables");
  if (!satisfies(p.psi1, m) && !satisfies(p.psi2, m))
    throw PreconditionError("not a satisfying assignment of either formula: " + to_string(m));
  RogueVerdict v;
  int t = pick_node(rogue_nodes(m, p, ltd), ltd);
  if (t < 0) return v;
  v.is_rogue = true;
  v.witness_node = t;
  v.violated_condition = rogue_conditions_at(m, p, ltd, t).front();
  return v;
}

Model symmetric_rogue(const Model &m, const ReductionPair &p, const LabeledTreeDecomposition &ltd) {
  auto verdict = classify_rogue(m, p, ltd);
  if (!verdict.is_rogue) throw PreconditionError("model is not rogue: " + to_string(m));
  if (!x_taken(m, p)) return m;
  const auto &r = p.registry;
  int t = *verdict.witness_node;
  Model out = m;

  auto flip_parity = [&](int u) {
    swap_values(out, r.o[u], r.e[u]);
    swap_values(out, r.o_1[u], r.e_1[u]);
    swap_values(out, r.o_2[u], r.e_2[u]);
  };

  // The parent sees t through o''_t and e''_t in the cubic variant. When both
  // are true the parent can switch parity on its own and t stays as it is;
  // without copies this is the case o_t, e_t in M where the swap is void.
  bool both_views = r.o_2[t] && m.contains(r.o_2[t]) && m.contains(r.e_2[t]);
  if (!both_views) flip_parity(t);
  for (int below = t, u = ltd.base.parent[t]; u >= 0; below = u, u = ltd.base.parent[u]) {
    flip_parity(u);
    if (ltd.is_join(u) && ltd.child_order[u][1] == below) {
      // Flipping the second child maps e_a o_b <-> e_a e_b and o_a e_b <-> o_a o_b.
      swap_values(out, r.o1[u], r.e2[u]);
      swap_values(out, r.o2[u], r.e1[u]);
    } else {
      swap_values(out, r.o1[u], r.e1[u]);
      swap_values(out, r.o2[u], r.e2[u]);
    }
  }

  bool a = count_in(m, {r.o[t], r.e[t]}) == 1;
  int cases = 0;
  for (int v : {r.o1[t], r.o2[t], r.e1[t], r.e2[t]}) cases += taken(m, p, v);
  if (!both_views && a && cases >= 1) {
    swap_values(out, r.o1[t], r.e2[t]);
    swap_values(out, r.o2[t], r.e1[t]);
    const Label &lab = ltd.label[t];
    auto [alpha, alpha_bar] = node_alpha(p, ltd, t);
    if (mono(p) && lab.kind == Label::Kind::variable && alpha && m.contains(r.top[lab.index]) &&
        m.contains(r.bot[lab.index]))
      swap_values(out, alpha, alpha_bar);
    if (cubic(p) && lab.kind == Label::Kind::clause && alpha && count_in(m, {alpha, alpha_bar}) == 1) {
      int c = lab.index;
      swap_values(out, r.chosen[c], r.unchosen[c]);
      swap_values(out, r.chosen1[c], r.unchosen1[c]);
      swap_values(out, r.chosen2[c], r.unchosen2[c]);
    }
  }
  return out;
}

ChoiceParity choice_parity(const Model &m, const Formula &f, const ReductionPair &p,
                           const LabeledTreeDecomposition &ltd) {
  const auto &r = p.registry;
  ChoiceParity out;
  Model source(f.num_vars);
  for (int v = 1; v <= f.num_vars; ++v) source.set(v, mono(p) ? m.contains(r.top[v]) : m.contains(v));
  auto falsified = [&](int c) {
    for (Literal l : f.clauses[c])
      if (source.contains(l.var) != l.negative) return false;
    return true;
  };
  for (int c = 0; c < static_cast<int>(f.clauses.size()); ++c) out.falsified += falsified(c);
  for (int t = 0; t < ltd.size(); ++t) {
    auto [alpha, alpha_bar] = node_alpha(p, ltd, t);
    if (!alpha || !m.contains(alpha)) continue;
    ++out.chosen;
    if (ltd.label[t].kind == Label::Kind::clause && !falsified(ltd.label[t].index)) out.chosen_falsified = false;
  }
  return out;
}

namespace {

struct Classified {
  std::vector<Model> models;
  std::vector<bool> rogue;
};

Classified classify_all(std::vector<Model> models, const ReductionPair &p, const LabeledTreeDecomposition &ltd) {
  Classified c;
  c.rogue.reserve(models.size());
  for (const auto &m : models) c.rogue.push_back(classify_rogue(m, p, ltd).is_rogue);
  c.models = std::move(models);
  return c;
}

// Checks the map on the rogue models of one side. Returns the failure text.
std::string check_side(const Classified &from, const Formula &target, const std::set<Model> &target_rogue,
                       const ReductionPair &p, const LabeledTreeDecomposition &ltd, bool &involution_ok,
                       std::optional<Model> &witness) {
  std::set<Model> image;
  for (std::size_t i = 0; i < from.models.size(); ++i) {
    if (!from.rogue[i]) continue;
    const Model &m = from.models[i];
    Model img = symmetric_rogue(m, p, ltd);
    auto fail = [&](std::string why) {
      witness = m;
      return why + ": " + to_string(m) + " -> " + to_string(img);
    };
    if (!satisfies(target, img)) return fail("image is not a model");
    if (!target_rogue.count(img)) return fail("image is not rogue");
    if (rogue_nodes(m, p, ltd) != rogue_nodes(img, p, ltd)) return fail("rogue nodes differ");
    if (!image.insert(img).second) return fail("map is not injective");
    if (symmetric_rogue(img, p, ltd) != m) {
      involution_ok = false;
      if (!witness) witness = m;
    }
  }
  if (image.size() != target_rogue.size()) return "image misses rogue models";
  return "";
}

} // namespace

BijectionReport check_bijection(const Formula &f, const ReductionPair &p, const LabeledTreeDecomposition &ltd,
                                const BijectionOptions &opt) {
  BijectionReport rep;
  rep.expected = count_bruteforce(f);
  std::vector<Model> m1, m2;
  try {
    std::uint64_t used = 0;
    m1 = enumerate_models(p.psi1, opt.budget, &used);
    rep.probes = used;
    m2 = enumerate_models(p.psi2, opt.budget - used, &used);
    rep.probes += used;
  } catch (const LimitError &) {
    if (!opt.allow_sampling) throw;
    rep.sampled = true;
  }

  if (rep.sampled) {
    // Spot checks: every sampled rogue model maps to a rogue model of the
    // other formula and back. Counts are not available.
    rep.map_ok = rep.involution_ok = rep.parity_ok = true;
    for (int side = 0; side < 2 && rep.failure.empty(); ++side) {
      const Formula &from = side == 0 ? p.psi1 : p.psi2;
      const Formula &to = side == 0 ? p.psi2 : p.psi1;
      for (const Model &m : sample_models(from, opt.samples, opt.seed + side, opt.budget)) {
        auto v = classify_rogue(m, p, ltd);
        if (!v.is_rogue) {
          auto par = choice_parity(m, f, p, ltd);
          if (par.chosen % 2 != side || !par.chosen_falsified) {
            rep.parity_ok = false;
            rep.failure = "parity of chosen labels: " + to_string(m);
            rep.counterexample = m;
          }
          continue;
        }
        Model img = symmetric_rogue(m, p, ltd);
        if (!satisfies(to, img) || !classify_rogue(img, p, ltd).is_rogue ||
            rogue_nodes(m, p, ltd) != rogue_nodes(img, p, ltd)) {
          rep.map_ok = false;
          rep.failure = "bad image: " + to_string(m);
          rep.counterexample = m;
        } else if (symmetric_rogue(img, p, ltd) != m) {
          rep.involution_ok = false;
          rep.failure = "not an involution: " + to_string(m);
          rep.counterexample = m;
        }
        if (!rep.failure.empty()) break;
      }
    }
    rep.difference_ok = true;
    return rep;
  }

  auto c1 = classify_all(std::move(m1), p, ltd);
  auto c2 = classify_all(std::move(m2), p, ltd);
  std::set<Model> r1, r2;
  for (std::size_t i = 0; i < c1.models.size(); ++i)
    if (c1.rogue[i]) r1.insert(c1.models[i]);
  for (std::size_t i = 0; i < c2.models.size(); ++i)
    if (c2.rogue[i]) r2.insert(c2.models[i]);
  rep.models1 = c1.models.size();
  rep.models2 = c2.models.size();
  rep.rogue1 = r1.size();
  rep.rogue2 = r2.size();
  rep.nonrogue1 = rep.models1 - rep.rogue1;
  rep.nonrogue2 = rep.models2 - rep.rogue2;
  rep.difference = rep.nonrogue1 - rep.nonrogue2;
  rep.difference_ok = rep.difference == rep.expected;

  rep.involution_ok = true;
  std::string why = check_side(c1, p.psi2, r2, p, ltd, rep.involution_ok, rep.counterexample);
  if (why.empty()) why = check_side(c2, p.psi1, r1, p, ltd, rep.involution_ok, rep.counterexample);
  rep.map_ok = why.empty() && rep.rogue1 == rep.rogue2;
  if (!why.empty()) rep.failure = why;
  else if (!rep.involution_ok) rep.failure = "map is not an involution";

  rep.parity_ok = true;
  for (int side = 0; side < 2 && rep.parity_ok; ++side) {
    const auto &c = side == 0 ? c1 : c2;
    for (std::size_t i = 0; i < c.models.size(); ++i) {
      if (c.rogue[i]) continue;
      auto par = choice_parity(c.models[i], f, p, ltd);
      if (par.chosen % 2 != side || !par.chosen_falsified || par.falsified < par.chosen) {
        rep.parity_ok = false;
        if (rep.failure.empty()) rep.failure = "parity of chosen labels: " + to_string(c.models[i]);
        if (!rep.counterexample) rep.counterexample = c.models[i];
        break;
      }
    }
  }
  if (!rep.difference_ok && rep.failure.empty())
    rep.failure = "non-rogue difference " + rep.difference.str() + " != " + rep.expected.str();
  return rep;
}

bool is_bipartite(const Formula &f) {
  auto adj = primal_graph(f).adjacency();
  std::vector<int> colour(f.num_vars + 1, -1);
  for (int s = 1; s <= f.num_vars; ++s) {
    if (colour[s] >= 0) continue;
    colour[s] = 0;
    std::vector<int> queue{s};
    for (std::size_t i = 0; i < queue.size(); ++i) {
      int u = queue[i];
      for (int w : adj[u]) {
        if (colour[w] < 0) {
          colour[w] = colour[u] ^ 1;
          queue.push_back(w);
        } else if (colour[w] == colour[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

StructureReport audit_structure(const Formula &f, const StructureRequirements &req) {
  StructureReport rep;
  rep.fragment = classify_fragment(f);
  auto occ = occurrences(f);
  int worst = 0;
  for (int v = 1; v <= f.num_vars; ++v)
    if (occ[v] > rep.max_occurrence) {
      rep.max_occurrence = occ[v];
      worst = v;
    }
  rep.bipartite = is_bipartite(f);
  auto fail = [&](std::string why) {
    if (rep.ok) rep.violation = std::move(why);
    rep.ok = false;
  };
  if (req.fragment && rep.fragment != *req.fragment) {
    // mon2 and impl2 formulas are also 2cnf; a stricter tag passes a looser requirement.
    bool looser = *req.fragment == FragmentTag::two_cnf &&
                  (rep.fragment == FragmentTag::mon2 || rep.fragment == FragmentTag::impl2 ||
                   rep.fragment == FragmentTag::horn2);
    if (!looser)
      fail(std::string("fragment is ") + to_string(rep.fragment) + ", expected " + to_string(*req.fragment));
  }
  if (req.max_occurrence && rep.max_occurrence > *req.max_occurrence)
    fail("variable " + std::to_string(worst) + " occurs " + std::to_string(rep.max_occurrence) + " times");
  if (req.bipartite && !rep.bipartite) fail("primal graph has an odd cycle");
  return rep;
}

WidthReport audit_width(const LabeledTreeDecomposition &input, const ReductionPair &pair,
                        const TreeDecomposition &out_td, int additive_bound, bool incidence) {
  WidthReport rep;
  rep.input_width = width(input.base);
  rep.output_width = width(out_td);
  rep.bound = rep.input_width + additive_bound;
  for (const Formula *psi : {&pair.psi1, &pair.psi2}) {
    Graph g = incidence ? incidence_graph(*psi) : primal_graph(*psi);
    if (auto err = validation_error(out_td, g)) {
      rep.valid = rep.ok = false;
      rep.violation = *err;
      return rep;
    }
  }
  if (rep.output_width > rep.bound) {
    rep.ok = false;
    rep.violation = "width " + std::to_string(rep.output_width) + " exceeds " + std::to_string(rep.bound);
  }
  return rep;
}

std::string report_json(const BijectionReport &b, const StructureReport &s, const WidthReport &w) {
  nlohmann::ordered_json j;
  auto &bij = j["bijection"];
  bij["pass"] = b.ok();
  bij["sampled"] = b.sampled;
  bij["probes"] = b.probes;
  bij["models1"] = b.models1.str();
  bij["models2"] = b.models2.str();
  bij["rogue1"] = b.rogue1.str();
  bij["rogue2"] = b.rogue2.str();
  bij["nonrogue1"] = b.nonrogue1.str();
  bij["nonrogue2"] = b.nonrogue2.str();
  bij["difference"] = b.difference.str();
  bij["expected"] = b.expected.str();
  bij["map_ok"] = b.map_ok;
  bij["involution_ok"] = b.involution_ok;
  bij["parity_ok"] = b.parity_ok;
  bij["difference_ok"] = b.difference_ok;
  if (!b.failure.empty()) bij["failure"] = b.failure;
  if (b.counterexample) bij["counterexample"] = b.counterexample->true_vars();
  auto &st = j["structure"];
  st["pass"] = s.ok;
  st["fragment"] = to_string(s.fragment);
  st["max_occurrence"] = s.max_occurrence;
  st["bipartite"] = s.bipartite;
  if (!s.violation.empty()) st["violation"] = s.violation;
  auto &wd = j["width"];
  wd["pass"] = w.ok;
  wd["valid"] = w.valid;
  wd["input_width"] = w.input_width;
  wd["output_width"] = w.output_width;
  wd["bound"] = w.bound;
  if (!w.violation.empty()) wd["violation"] = w.violation;
  j["pass"] = b.ok() && s.ok && w.ok;
  return j.dump(2) + "\n";
}

} // namespace cnfred
