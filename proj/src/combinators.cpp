#include "cnfred/combinators.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>

#include "cnfred/errors.hpp"
#include "cnfred/reduction.hpp"
#include "json.hpp"

namespace cnfred {

namespace {

std::vector<int> range(int from, int count) {
  std::vector<int> v(count);
  std::iota(v.begin(), v.end(), from);
  return v;
}

Clause implication(int a, int b) { return {Literal::neg(a), Literal::pos(b)}; }

// Skeleton tree that joins the operand decompositions under a common root.
// Output decompositions place each variable on the subtree spanned by the
// anchors of its clauses.
class Layout {
public:
  Layout() {
    parent_.push_back(-1);
    bags_.emplace_back();
  }

  // Copies td below the root. Nodes with more than two children become a
  // chain of duplicates so that every node has degree at most three.
  void attach(const TreeDecomposition &td, int offset) {
    if (td.size() == 0) return;
    int base = static_cast<int>(parent_.size());
    for (int t = 0; t < td.size(); ++t) {
      parent_.push_back(td.parent[t] < 0 ? 0 : base + td.parent[t]);
      std::vector<int> bag;
      for (int v : td.bags[t]) bag.push_back(v + offset);
      bags_.push_back(std::move(bag));
    }
    auto kids = td.children();
    for (int t = 0; t < td.size(); ++t) {
      int k = static_cast<int>(kids[t].size());
      int cur = base + t;
      for (int i = 0; i + 1 < k; ++i) {
        parent_[base + kids[t][i]] = cur;
        if (i + 2 < k) {
          int dup = add_node(cur);
          bags_[dup] = bags_[base + t];
          cur = dup;
        }
      }
      if (k > 0) parent_[base + kids[t][k - 1]] = cur;
    }
  }

  // Appends an empty node; call finish again before asking for positions.
  int add_node(int parent) {
    parent_.push_back(parent);
    bags_.emplace_back();
    return static_cast<int>(parent_.size()) - 1;
  }

  // Private node for one item at node h, chained below earlier ones.
  int chain_below(int h) {
    auto it = chain_tail_.find(h);
    int node = add_node(it == chain_tail_.end() ? h : it->second);
    chain_tail_[h] = node;
    return node;
  }

  void finish(int num_vars) {
    int n = static_cast<int>(parent_.size());
    std::vector<std::vector<int>> kids(n);
    for (int u = 1; u < n; ++u) kids[parent_[u]].push_back(u);
    depth_.assign(n, 0);
    pos_.assign(n, 0);
    std::vector<int> stack{0};
    int next = 0;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      pos_[u] = next++;
      for (auto it = kids[u].rbegin(); it != kids[u].rend(); ++it) {
        depth_[*it] = depth_[u] + 1;
        stack.push_back(*it);
      }
    }
    nodes_of_.assign(num_vars + 1, {});
    for (int t = 0; t < n; ++t)
      for (int v : bags_[t])
        if (v <= num_vars) nodes_of_[v].push_back(t);
  }

  // Deepest node whose bag holds every listed variable that occurs in some
  // bag; the root if none does.
  int home(const std::vector<int> &vars) const {
    std::vector<int> known;
    for (int v : vars)
      if (v < static_cast<int>(nodes_of_.size()) && !nodes_of_[v].empty()) known.push_back(v);
    if (known.empty()) return 0;
    int best = -1;
    for (int t : nodes_of_[known[0]]) {
      bool all = std::all_of(known.begin(), known.end(), [&](int v) {
        return std::binary_search(bags_[t].begin(), bags_[t].end(), v);
      });
      if (all && (best < 0 || depth_[t] > depth_[best])) best = t;
    }
    return best < 0 ? nodes_of_[known[0]].front() : best;
  }

  int home(const Clause &c) const {
    std::vector<int> vars;
    for (Literal l : c) vars.push_back(l.var);
    return home(vars);
  }

  int position(int node) const { return pos_[node]; }

  TreeDecomposition build(const Formula &f, const std::vector<int> &anchors) const {
    std::vector<const Clause *> cls;
    for (const Clause &c : f.clauses) cls.push_back(&c);
    return anchored_decomposition(parent_, 0, f.num_vars, cls, anchors);
  }

private:
  std::vector<int> parent_;
  std::vector<std::vector<int>> bags_;
  std::vector<int> depth_, pos_;
  std::vector<std::vector<int>> nodes_of_;
  std::map<int, int> chain_tail_;
};

// Disjoint union of decomposed operands with each operand's clauses anchored
// at its home node. Returns the union; offsets and anchors are filled in.
Formula join(const std::vector<const Decomposed *> &ops, Layout &layout, std::vector<int> &offsets,
             std::vector<int> &anchors, int extra_vars = 0) {
  Formula f(0);
  offsets.clear();
  for (const Decomposed *d : ops) {
    offsets.push_back(f.num_vars);
    layout.attach(d->td, f.num_vars);
    f = disjoint_union(f, d->formula);
  }
  layout.finish(f.num_vars + extra_vars);
  anchors.clear();
  for (const Clause &c : f.clauses) anchors.push_back(layout.home(c));
  return f;
}

// Gadget clauses over fresh variables only share a leaf with the clauses on
// the same variables.
void add_gadget(Formula &f, const SwitchGadget &g, Layout &layout, std::vector<int> &anchors) {
  std::map<std::vector<int>, int> leaf;
  for (const Clause &c : g.clauses) {
    f.clauses.push_back(c);
    int h = layout.home(c);
    if (h == 0) {
      std::vector<int> key;
      for (Literal l : c) key.push_back(l.var);
      std::sort(key.begin(), key.end());
      auto [it, fresh] = leaf.try_emplace(key, 0);
      if (fresh) it->second = layout.add_node(0);
      h = it->second;
    }
    anchors.push_back(h);
  }
}

void require_impl2(const Formula &f, const char *what) {
  if (f.polarity != Polarity::cnf) throw PreconditionError(std::string(what) + " must be a CNF");
  for (std::size_t i = 0; i < f.clauses.size(); ++i) {
    const Clause &c = f.clauses[i];
    if (c.size() != 2 || c[0].negative == c[1].negative)
      throw PreconditionError(std::string(what) + ": clause " + std::to_string(i + 1) + " is not an implication");
  }
}

void require_mon2(const Formula &f, const char *what) {
  if (f.polarity != Polarity::cnf) throw PreconditionError(std::string(what) + " must be a CNF");
  for (std::size_t i = 0; i < f.clauses.size(); ++i) {
    const Clause &c = f.clauses[i];
    bool ok = !c.empty() && c.size() <= 2 &&
              std::none_of(c.begin(), c.end(), [](Literal l) { return l.negative; });
    if (!ok) throw PreconditionError(std::string(what) + ": clause " + std::to_string(i + 1) + " is not monotone binary");
  }
}

// Two-colouring of the primal graph; 0 is the even side.
std::vector<int> two_colouring(const Formula &f, const char *what) {
  auto adj = primal_graph(f).adjacency();
  std::vector<int> colour(f.num_vars + 1, -1);
  for (int s = 1; s <= f.num_vars; ++s) {
    if (colour[s] >= 0) continue;
    colour[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int w : adj[u]) {
        if (colour[w] < 0) {
          colour[w] = 1 - colour[u];
          q.push(w);
        } else if (colour[w] == colour[u]) {
          throw PreconditionError(std::string(what) + ": primal graph is not bipartite");
        }
      }
    }
  }
  return colour;
}

Decomposed decomposed(const Formula &f) { return {f, trivial_td(f)}; }

} // namespace

const char *to_string(SwitchKind k) {
  switch (k) {
  case SwitchKind::plain: return "switch";
  case SwitchKind::monswitch: return "monswitch";
  case SwitchKind::relswitch: return "relswitch";
  case SwitchKind::cycswitch: return "cycswitch";
  case SwitchKind::extcycswitch: return "extcycswitch";
  }
  return "?";
}

SwitchGadget make_switch(const std::vector<int> &v1, const std::vector<int> &v2, int s) {
  for (int v : v1) {
    if (v == s) throw PreconditionError("switch variable occurs in V1");
    if (std::find(v2.begin(), v2.end(), v) != v2.end())
      throw PreconditionError("switch sets overlap in variable " + std::to_string(v));
  }
  if (std::find(v2.begin(), v2.end(), s) != v2.end()) throw PreconditionError("switch variable occurs in V2");
  SwitchGadget g;
  g.kind = SwitchKind::plain;
  g.fresh_vars = {s};
  for (int v : v1) g.clauses.push_back(implication(s, v));
  for (int v : v2) g.clauses.push_back(implication(v, s));
  return g;
}

SwitchGadget monswitch(const std::vector<int> &iota, const std::vector<int> &tau, const std::vector<int> &kappa,
                       int first_fresh) {
  std::vector<int> k = kappa;
  std::sort(k.begin(), k.end());
  auto inside = [&](const std::vector<int> &sub) {
    return std::all_of(sub.begin(), sub.end(), [&](int v) { return std::binary_search(k.begin(), k.end(), v); });
  };
  if (!inside(iota) || !inside(tau)) throw PreconditionError("monswitch operands must lie inside kappa");
  int si = first_fresh, st = first_fresh + 1;
  if (std::binary_search(k.begin(), k.end(), si) || std::binary_search(k.begin(), k.end(), st))
    throw PreconditionError("monswitch selectors must be fresh");
  SwitchGadget g;
  g.kind = SwitchKind::monswitch;
  g.fresh_vars = {si, st};
  auto outside = [&](int sel, const std::vector<int> &sub) {
    std::vector<int> s = sub;
    std::sort(s.begin(), s.end());
    for (int v : k)
      if (!std::binary_search(s.begin(), s.end(), v)) g.clauses.push_back({Literal::pos(sel), Literal::pos(v)});
  };
  outside(si, iota);
  outside(st, tau);
  return g;
}

SwitchGadget relswitch(const std::vector<int> &bits, const std::vector<int> &vars, int s) {
  std::vector<int> all = bits;
  all.insert(all.end(), vars.begin(), vars.end());
  all.push_back(s);
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw PreconditionError("relswitch sets must be pairwise disjoint");
  SwitchGadget g;
  g.kind = SwitchKind::relswitch;
  g.fresh_vars = {s};
  for (int b : bits) g.clauses.push_back({Literal::pos(s), Literal::pos(b)});
  for (int v : vars) g.clauses.push_back({Literal::pos(s), Literal::pos(v)});
  return g;
}

CycSwitch extcycswitch(int bits, const Decomposed &a, const Decomposed &b) {
  require_impl2(a.formula, "first operand");
  require_impl2(b.formula, "second operand");
  for (const Decomposed *d : {&a, &b}) {
    auto occ = occurrences(d->formula);
    for (int v = 1; v <= d->formula.num_vars; ++v)
      if (occ[v] > 3) throw PreconditionError("variable " + std::to_string(v) + " occurs more than three times");
  }

  CycSwitch out;
  Layout layout;
  std::vector<int> offsets, anchors;
  Formula f = join({&a, &b}, layout, offsets, anchors);
  int n1 = a.formula.num_vars, n2 = b.formula.num_vars;
  out.offset = n1;
  out.m = std::max({n1, n2, 1});
  std::vector<int> colour = two_colouring(f, "operands");

  // A variable with three occurrences is rewired onto a 6-cycle of copies;
  // its first copy takes the connection to the switch.
  std::vector<int> attach(n1 + n2 + 1);
  std::iota(attach.begin(), attach.end(), 0);
  std::vector<std::vector<int>> clauses_of(n1 + n2 + 1);
  for (int i = 0; i < static_cast<int>(f.clauses.size()); ++i)
    for (Literal l : f.clauses[i]) clauses_of[l.var].push_back(i);
  // Two of the three implications of a rewired variable point the same way
  // relative to it.
  std::vector<std::vector<int>> rewired(n1 + n2 + 1);
  for (int v = 1; v <= n1 + n2; ++v) {
    if (clauses_of[v].size() < 3) continue;
    std::vector<int> in, outgoing;
    for (int i : clauses_of[v])
      for (Literal l : f.clauses[i])
        if (l.var == v) (l.negative ? outgoing : in).push_back(i);
    rewired[v] = in.size() >= 2 ? in : outgoing;
    rewired[v].resize(2);
  }
  // Each operand variable gets a private node where its connection to the
  // cycle lives: below the first rewired clause, or else below its home.
  std::vector<int> home(n1 + n2 + 1);
  for (int v = 1; v <= n1 + n2; ++v)
    home[v] = layout.chain_below(rewired[v].empty() ? layout.home(std::vector<int>{v}) : anchors[rewired[v][0]]);
  layout.finish(n1 + n2);
  SwitchGadget &g = out.gadget;
  g.kind = bits > 0 ? SwitchKind::extcycswitch : SwitchKind::cycswitch;
  std::vector<int> gadget_anchor;
  auto gadget_clause = [&](Clause c, int anchor) {
    g.clauses.push_back(std::move(c));
    gadget_anchor.push_back(anchor);
  };
  for (int v = 1; v <= n1 + n2; ++v) {
    const auto &pick = rewired[v];
    if (pick.empty()) continue;
    std::vector<int> copy(6);
    copy[0] = v;
    for (int j = 1; j <= 5; ++j) {
      copy[j] = f.fresh();
      g.fresh_vars.push_back(copy[j]);
      colour.push_back(j % 2 == 0 ? colour[v] : 1 - colour[v]);
    }
    // v -> v1 -> v2 -> v3 sit with the first rewired clause, the rest with
    // the second.
    for (int j = 0; j < 6; ++j) gadget_clause(implication(copy[j], copy[(j + 1) % 6]), j < 3 ? home[v] : anchors[pick[1]]);
    for (int k = 0; k < 2; ++k)
      for (Literal &l : f.clauses[pick[k]])
        if (l.var == v) l.var = copy[2 + 2 * k];
    anchors[pick[0]] = home[v];
    attach[v] = copy[1];
  }

  // Cycle positions s_i^e, s_i^o for i = 1..2m, in that order.
  int slots = 2 * out.m;
  std::vector<int> s(2 * slots);
  for (int &x : s) {
    x = f.fresh();
    g.fresh_vars.push_back(x);
  }
  auto s_at = [&](int i, int side) { return s[2 * (i - 1) + side]; };
  std::vector<int> s_anchor(2 * slots, -1);
  std::vector<bool> used(2 * slots, false);

  // Operand variables are numbered along the skeleton so the cycle follows
  // the decomposition.
  auto order = [&](int from, int count) {
    std::vector<int> vars = range(from, count);
    std::stable_sort(vars.begin(), vars.end(),
                     [&](int x, int y) { return layout.position(home[x]) < layout.position(home[y]); });
    return vars;
  };
  auto connect = [&](int slot, int var, bool first_operand) {
    int u = attach[var];
    int side = colour[u];
    int idx = 2 * (slot - 1) + side;
    used[idx] = true;
    s_anchor[idx] = home[var];
    if (first_operand) gadget_clause(implication(s_at(slot, side), u), home[var]);
    else gadget_clause(implication(u, s_at(slot, side)), home[var]);
  };
  std::vector<int> v1 = order(1, n1), v2 = order(n1 + 1, n2);
  for (int k = 0; k < n1; ++k) connect(k + 1, v1[k], true);
  for (int k = 0; k < n2; ++k) connect(out.m + k + 1, v2[k], false);

  // Unconnected positions follow their nearest connected predecessor on a
  // chain of private nodes.
  int last = -1;
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i < 2 * slots; ++i) {
      if (s_anchor[i] >= 0 && used[i]) last = s_anchor[i];
      else if (s_anchor[i] < 0 && last >= 0) s_anchor[i] = layout.chain_below(last);
    }
  for (int &x : s_anchor)
    if (x < 0) x = layout.chain_below(0);

  for (int i = 0; i < bits; ++i) {
    int b = f.fresh();
    g.fresh_vars.push_back(b);
    out.bits.push_back(b);
    int j = static_cast<int>(std::find(used.begin(), used.end(), false) - used.begin());
    used[j] = true;
    gadget_clause(implication(s[j], b), s_anchor[j]);
  }
  for (int i = 0; i < 2 * slots; ++i) {
    int j = (i + 1) % (2 * slots);
    gadget_clause(implication(s[i], s[j]), s_anchor[j]);
  }

  out.phi1 = Formula(f.num_vars);
  out.phi2 = Formula(f.num_vars);
  int m1 = static_cast<int>(a.formula.clauses.size());
  for (int i = 0; i < static_cast<int>(f.clauses.size()); ++i)
    (i < m1 ? out.phi1 : out.phi2).clauses.push_back(f.clauses[i]);
  for (std::size_t i = 0; i < g.clauses.size(); ++i) {
    f.clauses.push_back(g.clauses[i]);
    anchors.push_back(gadget_anchor[i]);
  }
  out.combined.td = layout.build(f, anchors);
  out.combined.formula = std::move(f);
  return out;
}

CycSwitch cycswitch(const Decomposed &a, const Decomposed &b) { return extcycswitch(0, a, b); }

namespace {

Decomposed with_switch(const Decomposed &x, const Decomposed &y) {
  Layout layout;
  std::vector<int> offsets, anchors;
  Formula f = join({&x, &y}, layout, offsets, anchors);
  int n1 = x.formula.num_vars, n2 = y.formula.num_vars;
  int s = f.fresh();
  add_gadget(f, make_switch(range(1, n1), range(n1 + 1, n2), s), layout, anchors);
  return {f, layout.build(f, anchors)};
}

Decomposed pair_side(const ReductionPair &p, bool first) { return {first ? p.psi1 : p.psi2, p.out_td}; }

} // namespace

TwoCall gapp_impl_two_call(const Formula &phi, const TreeDecomposition &td, const Formula &phi2,
                           const TreeDecomposition &td2) {
  ReductionPair p = reduce_impl(phi, label_td(td, phi, false));
  ReductionPair q = reduce_impl(phi2, label_td(td2, phi2, false));
  return {with_switch(pair_side(p, true), pair_side(q, false)), with_switch(pair_side(p, false), pair_side(q, true))};
}

TwoCall gapp_impl_two_call(const Formula &phi, const Formula &phi2) {
  return gapp_impl_two_call(phi, trivial_td(phi), phi2, trivial_td(phi2));
}

TwoCall gapp_cubic_two_call(const Formula &phi, const TreeDecomposition &td, const Formula &phi2,
                            const TreeDecomposition &td2) {
  auto cubic = [](const Formula &f, const TreeDecomposition &t) {
    Normalized nm = normalize_3cnf(f, label_td(t, f, false));
    return reduce_cubic_bipartite(nm.formula, nm.ltd);
  };
  ReductionPair p = cubic(phi, td), q = cubic(phi2, td2);
  return {cycswitch(pair_side(p, true), pair_side(q, false)).combined,
          cycswitch(pair_side(p, false), pair_side(q, true)).combined};
}

TwoCall gapp_cubic_two_call(const Formula &phi, const Formula &phi2) {
  return gapp_cubic_two_call(phi, trivial_td(phi), phi2, trivial_td(phi2));
}

TwoCall gapp_mon_two_call(const Formula &phi, const TreeDecomposition &td, const Formula &phi2,
                          const TreeDecomposition &td2) {
  ReductionPair p = reduce_monotone(phi, label_td(td, phi, true));
  ReductionPair q = reduce_monotone(phi2, label_td(td2, phi2, true));
  Decomposed parts[4] = {pair_side(p, true), pair_side(p, false), pair_side(q, true), pair_side(q, false)};
  auto build = [&](int iota, int tau) {
    Layout layout;
    std::vector<int> offsets, anchors;
    Formula f = join({&parts[0], &parts[1], &parts[2], &parts[3]}, layout, offsets, anchors);
    auto vars_of = [&](int i) { return range(offsets[i] + 1, parts[i].formula.num_vars); };
    std::vector<int> kappa = range(1, f.num_vars);
    int first = f.num_vars + 1;
    f.num_vars += 2;
    add_gadget(f, monswitch(vars_of(iota), vars_of(tau), kappa, first), layout, anchors);
    return Decomposed{f, layout.build(f, anchors)};
  };
  // beta = psi1, psi2, psi1', psi2'
  return {build(0, 3), build(1, 2)};
}

TwoCall gapp_mon_two_call(const Formula &phi, const Formula &phi2) {
  return gapp_mon_two_call(phi, trivial_td(phi), phi2, trivial_td(phi2));
}

DnfPad dnf_pad_two_call(const Decomposed &psi, const Decomposed &psi2) {
  require_impl2(psi.formula, "first operand");
  require_impl2(psi2.formula, "second operand");
  bool first_small = psi.formula.num_vars <= psi2.formula.num_vars;
  const Decomposed &small = first_small ? psi : psi2;
  const Decomposed &large = first_small ? psi2 : psi;
  int n = large.formula.num_vars - small.formula.num_vars;

  auto pad = [](const Decomposed &d, int extra) {
    Layout layout;
    std::vector<int> offsets, anchors;
    Formula f = join({&d}, layout, offsets, anchors);
    int base = f.num_vars;
    std::vector<int> fresh = range(base + 1, extra);
    f.num_vars += extra;
    int s = f.fresh();
    std::vector<int> v1 = range(1, base);
    v1.insert(v1.end(), fresh.begin(), fresh.end());
    // The padding variables sit on both sides, so s and the padding are
    // equivalent; make_switch rejects that overlap, hence the second half here.
    SwitchGadget g = make_switch(v1, {}, s);
    for (int v : fresh) g.clauses.push_back(implication(v, s));
    add_gadget(f, g, layout, anchors);
    return Decomposed{f, layout.build(f, anchors)};
  };
  Decomposed a = pad(small, n), b = pad(large, 0);
  DnfPad out;
  out.first = first_small ? a : b;
  out.second = first_small ? b : a;
  out.n_first = out.first.formula.num_vars;
  out.n_second = out.second.formula.num_vars;
  return out;
}

const char *to_string(Op op) {
  switch (op) {
  case Op::mask: return "MASK";
  case Op::shr: return "SHR";
  case Op::div: return "DIV";
  case Op::sub: return "SUB";
  }
  return "?";
}

const char *to_string(Circuit c) { return c == Circuit::ac0 ? "AC0" : "TC0"; }

Recovery restricted_eval(const Program &p, const std::vector<Count> &inputs) {
  if (static_cast<int>(inputs.size()) != p.inputs)
    throw PreconditionError("program expects " + std::to_string(p.inputs) + " inputs");
  std::vector<Count> reg = inputs;
  auto get = [&](int r) -> const Count & {
    if (r < 0 || r >= static_cast<int>(reg.size())) throw PreconditionError("register " + std::to_string(r) + " is undefined");
    return reg[r];
  };
  for (const Instr &in : p.code) {
    switch (in.op) {
    case Op::mask:
    case Op::shr: {
      if (in.b < 0) throw PreconditionError("negative shift width");
      Count x = get(in.a);
      reg.push_back(in.op == Op::mask ? Count(x & ((Count(1) << in.b) - 1)) : Count(x >> in.b));
      break;
    }
    case Op::div: {
      if (p.circuit != Circuit::tc0) throw PreconditionError("DIV is not permitted in an AC0 program");
      Count d = get(in.b);
      if (d == 0) throw Error("recovery divides by zero");
      reg.push_back(get(in.a) / d);
      break;
    }
    case Op::sub: reg.push_back(get(in.a) - get(in.b)); break;
    }
  }
  return {get(p.first), get(p.second), get(p.result)};
}

Recovery restricted_eval(const Program &p, const Count &count) { return restricted_eval(p, std::vector<Count>{count}); }

const char *to_string(PipelineMode m) {
  switch (m) {
  case PipelineMode::gapp_impl_two_call: return "gapp_impl_two_call";
  case PipelineMode::gapp_mon_two_call: return "gapp_mon_two_call";
  case PipelineMode::dnf_pad_two_call: return "dnf_pad_two_call";
  case PipelineMode::single_mon: return "single_mon";
  case PipelineMode::single_impl: return "single_impl";
  case PipelineMode::gapp_cubic_two_call: return "gapp_cubic_two_call";
  }
  return "?";
}

PipelineCertificate single_call_mon(const Decomposed &phi1, const Decomposed &phi2) {
  require_mon2(phi1.formula, "first operand");
  require_mon2(phi2.formula, "second operand");
  PipelineCertificate cert;
  cert.mode = PipelineMode::single_mon;
  int n1 = phi1.formula.num_vars, n2 = phi2.formula.num_vars;
  cert.m = n1 + n2 + 1;
  Layout layout;
  std::vector<int> anchors;
  Formula f = join({&phi1, &phi2}, layout, cert.offsets, anchors);
  std::vector<int> bits = range(f.num_vars + 1, cert.m);
  f.num_vars += cert.m;
  int s = f.fresh();
  add_gadget(f, relswitch(bits, range(1, n1), s), layout, anchors);
  cert.formulas.push_back({f, layout.build(f, anchors)});
  // r1 = #phi2, r2 = #phi1 * #phi2, r3 = #phi1, r4 = r3 - r1
  cert.recovery.circuit = Circuit::tc0;
  cert.recovery.code = {{Op::mask, 0, cert.m}, {Op::shr, 0, cert.m}, {Op::div, 2, 1}, {Op::sub, 3, 1}};
  cert.recovery.first = 3;
  cert.recovery.second = 1;
  cert.recovery.result = 4;
  return cert;
}

PipelineCertificate single_call_mon(const Formula &phi1, const Formula &phi2) {
  return single_call_mon(decomposed(phi1), decomposed(phi2));
}

PipelineCertificate single_call_impl(const Decomposed &phi1, const Decomposed &phi2) {
  int n1 = phi1.formula.num_vars, n2 = phi2.formula.num_vars;
  int m = std::max({n1, n2, 1});
  if (phi2.formula.clauses.empty() && n2 == m)
    throw PreconditionError("second operand has no clauses and 2^m models, which overflows the low bits");
  CycSwitch cs = extcycswitch(m, phi1, phi2);
  PipelineCertificate cert;
  cert.mode = PipelineMode::single_impl;
  cert.m = m;
  cert.offsets = {0, cs.offset};
  cert.formulas.push_back(std::move(cs.combined));
  // r1 = #phi2, r2 = #phi1, r3 = r2 - r1
  cert.recovery.circuit = Circuit::ac0;
  cert.recovery.code = {{Op::mask, 0, m}, {Op::shr, 0, m}, {Op::sub, 2, 1}};
  cert.recovery.first = 2;
  cert.recovery.second = 1;
  cert.recovery.result = 3;
  return cert;
}

PipelineCertificate single_call_impl(const Formula &phi1, const Formula &phi2) {
  return single_call_impl(decomposed(phi1), decomposed(phi2));
}

PipelineCertificate two_call_certificate(PipelineMode mode, const TwoCall &calls) {
  PipelineCertificate cert;
  cert.mode = mode;
  cert.formulas = {calls.first, calls.second};
  cert.offsets = {0, 0};
  cert.recovery.circuit = Circuit::ac0;
  cert.recovery.inputs = 2;
  cert.recovery.code = {{Op::sub, 0, 1}};
  cert.recovery.first = 0;
  cert.recovery.second = 1;
  cert.recovery.result = 2;
  return cert;
}

PipelineCertificate two_call_certificate(const DnfPad &pad) {
  PipelineCertificate cert;
  cert.mode = PipelineMode::dnf_pad_two_call;
  cert.formulas = {{dualize(pad.first.formula), pad.first.td}, {dualize(pad.second.formula), pad.second.td}};
  cert.offsets = {0, 0};
  // With equal variable counts (2^n - r0) - (2^n - r1) = r1 - r0.
  cert.recovery.circuit = Circuit::ac0;
  cert.recovery.inputs = 2;
  cert.recovery.code = {{Op::sub, 1, 0}};
  cert.recovery.first = 0;
  cert.recovery.second = 1;
  cert.recovery.result = 2;
  return cert;
}

std::string certificate_json(const PipelineCertificate &cert, const std::vector<std::string> &files) {
  nlohmann::json j;
  j["mode"] = to_string(cert.mode);
  j["m"] = cert.m;
  j["formulas"] = files;
  j["offsets"] = cert.offsets;
  nlohmann::json vars = nlohmann::json::array();
  for (const Decomposed &d : cert.formulas) vars.push_back(d.formula.num_vars);
  j["num_vars"] = vars;
  nlohmann::json code = nlohmann::json::array();
  for (const Instr &in : cert.recovery.code) code.push_back({to_string(in.op), in.a, in.b});
  j["recovery"] = {{"circuit", to_string(cert.recovery.circuit)},
                   {"inputs", cert.recovery.inputs},
                   {"program", code},
                   {"outputs",
                    {{"first", cert.recovery.first}, {"second", cert.recovery.second}, {"result", cert.recovery.result}}}};
  return j.dump(2);
}

} // namespace cnfred
