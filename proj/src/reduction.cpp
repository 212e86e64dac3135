#include "cnfred/reduction.hpp"

#include <algorithm>
#include <ostream>

#include "cnfred/errors.hpp"

namespace cnfred {

const char *to_string(Variant v) {
  switch (v) {
  case Variant::impl: return "impl";
  case Variant::monotone: return "mon";
  case Variant::cubic_bipartite: return "cubic";
  }
  return "?";
}

int AuxRegistry::allocate(int &counter, std::string name) {
  ++counter;
  if (static_cast<int>(names.size()) <= counter) names.resize(counter + 1);
  names[counter] = std::move(name);
  return counter;
}

namespace {

std::string tag(const char *base, int index) { return std::string(base) + std::to_string(index + 1); }

class Builder {
public:
  Builder(const Formula &f, const LabeledTreeDecomposition &ltd, Variant variant)
      : f_(f), ltd_(ltd), variant_(variant) {
    pair_.variant = variant;
    auto &r = pair_.registry;
    r.source_vars = f.num_vars;
    r.names.assign(f.num_vars + 1, "");
    counter_ = f.num_vars;
    int m = static_cast<int>(f.clauses.size());
    int n = ltd.size();
    for (auto *vec : {&r.chosen, &r.unchosen, &r.chosen1, &r.chosen2, &r.unchosen1, &r.unchosen2})
      vec->assign(m, 0);
    for (auto *vec : {&r.o, &r.e, &r.o1, &r.o2, &r.e1, &r.e2, &r.o_1, &r.o_2, &r.e_1, &r.e_2,
                      &r.handle, &r.handle_link})
      vec->assign(n, 0);
    for (auto *vec : {&r.top, &r.bot, &r.var_bar}) vec->assign(f.num_vars + 1, 0);
  }

  ReductionPair run();

private:
  bool mono() const { return variant_ == Variant::monotone; }
  bool cubic() const { return variant_ == Variant::cubic_bipartite; }
  int alloc(std::string name) { return pair_.registry.allocate(counter_, std::move(name)); }

  int skel(int parent) {
    pair_.plan.parent.push_back(parent);
    return static_cast<int>(pair_.plan.parent.size()) - 1;
  }

  // a -> b, or its positive form over the overline variable a in the
  // monotone variant.
  void link(int a, int b, int anchor) {
    Clause c = mono() ? Clause{Literal::pos(a), Literal::pos(b)}
                      : Clause{Literal::neg(a), Literal::pos(b)};
    clauses_.push_back(std::move(c));
    anchors_.push_back(anchor);
  }
  void positive(int a, int b, int anchor) {
    clauses_.push_back({Literal::pos(a), Literal::pos(b)});
    anchors_.push_back(anchor);
  }
  void implication(int a, int b, int anchor) {
    clauses_.push_back({Literal::neg(a), Literal::pos(b)});
    anchors_.push_back(anchor);
  }

  void allocate();
  void emit_node(int t);
  void emit_clause(int t, int c, int anchor);
  int literal_anchor(int t, int c, int v, int fallback);

  // State of a child as seen by its parent's case clauses.
  int child_o(int c) const { return cubic() ? pair_.registry.o_2[c] : pair_.registry.o[c]; }
  int child_e(int c) const { return cubic() ? pair_.registry.e_2[c] : pair_.registry.e[c]; }

  const Formula &f_;
  const LabeledTreeDecomposition &ltd_;
  Variant variant_;
  ReductionPair pair_;
  int counter_ = 0;
  std::vector<Clause> clauses_;
  std::vector<int> anchors_;
  std::vector<int> depth_;
};

void Builder::allocate() {
  auto &r = pair_.registry;
  int m = static_cast<int>(f_.clauses.size());
  for (int c = 0; c < m; ++c) {
    r.chosen[c] = alloc(tag("chosen_c", c));
    r.unchosen[c] = alloc(tag("unchosen_c", c));
    if (!cubic()) continue;
    r.chosen1[c] = alloc(tag("chosen'_c", c));
    r.chosen2[c] = alloc(tag("chosen''_c", c));
    r.unchosen1[c] = alloc(tag("unchosen'_c", c));
    r.unchosen2[c] = alloc(tag("unchosen''_c", c));
  }
  if (mono()) {
    for (int v = 1; v <= f_.num_vars; ++v) {
      r.top[v] = alloc("top_v" + std::to_string(v));
      r.bot[v] = alloc("bot_v" + std::to_string(v));
      r.var_bar[v] = alloc("bar_v" + std::to_string(v));
    }
  }
  for (int t : ltd_.preorder()) {
    std::string s = "_t" + std::to_string(t + 1);
    r.o[t] = alloc("o" + s);
    r.e[t] = alloc("e" + s);
    bool labeled = ltd_.label[t].kind == Label::Kind::clause ||
                   (mono() && ltd_.label[t].kind == Label::Kind::variable);
    std::size_t kids = ltd_.child_order[t].size();
    const char *bar = mono() ? "bar" : "";
    if (kids == 2 || (kids == 1 && labeled)) r.o1[t] = alloc(std::string("o1") + bar + s);
    if (kids >= 1) r.o2[t] = alloc(std::string("o2") + bar + s);
    if (kids == 2 || (kids == 1 && labeled)) r.e1[t] = alloc(std::string("e1") + bar + s);
    if (kids >= 1) r.e2[t] = alloc(std::string("e2") + bar + s);
    if (cubic() && t != ltd_.base.root) {
      r.o_1[t] = alloc("o'" + s);
      r.o_2[t] = alloc("o''" + s);
      r.e_1[t] = alloc("e'" + s);
      r.e_2[t] = alloc("e''" + s);
    }
  }
  r.x = alloc(mono() ? "xbar" : "x");
  if (cubic()) {
    r.handle[ltd_.base.root] = r.x;
    for (int t : ltd_.preorder()) {
      for (int c : ltd_.child_order[t]) {
        if (ltd_.is_join(t)) {
          r.handle_link[c] = alloc("xlink_t" + std::to_string(c + 1));
          r.handle[c] = alloc("xcopy_t" + std::to_string(c + 1));
        } else {
          r.handle[c] = r.handle[t];
        }
      }
    }
  }
}

int Builder::literal_anchor(int t, int c, int v, int fallback) {
  if (!ltd_.incidence) return fallback;
  // Deepest node whose bag holds both the clause vertex and the variable.
  int cv = f_.num_vars + c + 1;
  int best = -1;
  for (int u = 0; u < ltd_.size(); ++u)
    if (ltd_.base.bag_contains(u, cv) && ltd_.base.bag_contains(u, v) &&
        (best < 0 || depth_[u] > depth_[best]))
      best = u;
  if (best < 0) best = t;
  return skel(pair_.plan.node_of[best]);
}

void Builder::emit_clause(int t, int c, int anchor) {
  auto &r = pair_.registry;
  const Clause &cl = f_.clauses[c];
  if (mono()) {
    for (Literal l : cl)
      positive(r.unchosen[c], l.negative ? r.top[l.var] : r.bot[l.var],
               literal_anchor(t, c, l.var, anchor));
    return;
  }
  int neg_target = r.chosen[c], pos_target = r.unchosen[c];
  if (cubic()) {
    implication(r.chosen[c], r.chosen1[c], anchor);
    implication(r.chosen1[c], r.chosen2[c], anchor);
    implication(r.unchosen[c], r.unchosen1[c], anchor);
    implication(r.unchosen1[c], r.unchosen2[c], anchor);
    neg_target = r.chosen2[c];
    pos_target = r.unchosen2[c];
  }
  for (Literal l : cl) {
    int a = literal_anchor(t, c, l.var, anchor);
    if (l.negative) implication(neg_target, l.var, a);
    else implication(l.var, pos_target, a);
  }
}

void Builder::emit_node(int t) {
  auto &r = pair_.registry;
  int main = pair_.plan.node_of[t];
  const auto &kids = ltd_.child_order[t];
  const Label &lab = ltd_.label[t];

  if (cubic() && t != ltd_.base.root) {
    int hand = pair_.plan.node_of[t] - 1; // handoff node allocated just before main
    implication(r.o[t], r.o_1[t], hand);
    implication(r.o_1[t], r.o_2[t], hand);
    implication(r.e[t], r.e_1[t], hand);
    implication(r.e_1[t], r.e_2[t], hand);
    if (r.handle_link[t]) {
      int p = ltd_.base.parent[t];
      implication(r.handle[p], r.handle_link[t], hand);
      implication(r.handle_link[t], r.handle[t], hand);
    }
  }

  if (kids.empty()) {
    if (cubic()) implication(r.handle[t], r.e[t], main);
    else link(r.x, r.e[t], main);
    return;
  }

  int alpha = 0, alpha_bar = 0;
  if (lab.kind == Label::Kind::clause) {
    int c = lab.index;
    emit_clause(t, c, skel(main));
    alpha = r.chosen[c];
    alpha_bar = r.unchosen[c];
  } else if (lab.kind == Label::Kind::variable && mono()) {
    int v = lab.index;
    int leaf = skel(main);
    positive(r.var_bar[v], r.top[v], leaf);
    positive(r.var_bar[v], r.bot[v], leaf);
    positive(r.top[v], r.bot[v], leaf);
    alpha = v;
    alpha_bar = r.var_bar[v];
  }
  int a = kids[0];
  if (kids.size() == 2) {
    int b = kids[1];
    int l1 = skel(main), l2 = skel(main), l3 = skel(main), l4 = skel(main);
    link(r.o1[t], child_e(a), l1);
    link(r.o1[t], child_o(b), l1);
    link(r.o1[t], r.o[t], l1);
    link(r.o2[t], child_o(a), l2);
    link(r.o2[t], child_e(b), l2);
    link(r.o2[t], r.o[t], l2);
    link(r.e1[t], child_o(a), l3);
    link(r.e1[t], child_o(b), l3);
    link(r.e1[t], r.e[t], l3);
    link(r.e2[t], child_e(a), l4);
    link(r.e2[t], child_e(b), l4);
    link(r.e2[t], r.e[t], l4);
    return;
  }
  if (alpha) {
    int l1 = skel(main), l2 = skel(main), l3 = skel(main), l4 = skel(main);
    link(r.o1[t], child_e(a), l1);
    link(r.o1[t], alpha, l1);
    link(r.o1[t], r.o[t], l1);
    link(r.o2[t], child_o(a), l2);
    link(r.o2[t], alpha_bar, l2);
    link(r.o2[t], r.o[t], l2);
    link(r.e1[t], child_o(a), l3);
    link(r.e1[t], alpha, l3);
    link(r.e1[t], r.e[t], l3);
    link(r.e2[t], child_e(a), l4);
    link(r.e2[t], alpha_bar, l4);
    link(r.e2[t], r.e[t], l4);
    return;
  }
  int l2 = skel(main), l4 = skel(main);
  link(r.o2[t], child_o(a), l2);
  link(r.o2[t], r.o[t], l2);
  link(r.e2[t], child_e(a), l4);
  link(r.e2[t], r.e[t], l4);
}

ReductionPair Builder::run() {
  if (auto err = labeled_validation_error(ltd_, f_))
    throw PreconditionError("labeled decomposition: " + *err);
  if (mono() && !ltd_.fully) throw PreconditionError("monotone variant needs a fully labeled decomposition");
  if (cubic()) {
    auto occ = occurrences(f_);
    for (int v = 1; v <= f_.num_vars; ++v)
      if (occ[v] > 3)
        throw PreconditionError("variable " + std::to_string(v) + " occurs " +
                                std::to_string(occ[v]) + " times; normalize first");
    for (const auto &c : f_.clauses) {
      if (c.size() > 3) throw PreconditionError("clause longer than 3; normalize first");
      // c'' would need a fourth occurrence.
      if (c.size() == 3 && c[0].negative == c[1].negative && c[1].negative == c[2].negative)
        throw PreconditionError("clause with three literals of one sign; normalize first");
    }
  }
  allocate();
  auto &r = pair_.registry;
  depth_ = ltd_.base.depths();

  // Skeleton: one main node per decomposition node, preceded by a handoff
  // node in the cubic variant.
  auto order = ltd_.preorder();
  pair_.plan.node_of.assign(ltd_.size(), -1);
  for (int t : order) {
    int p = ltd_.base.parent[t];
    int up = p < 0 ? -1 : pair_.plan.node_of[p];
    if (cubic() && p >= 0) up = skel(up);
    pair_.plan.node_of[t] = skel(up);
  }
  pair_.plan.root = pair_.plan.node_of[ltd_.base.root];

  for (int t : order) emit_node(t);

  int root = ltd_.base.root;
  Formula base(counter_);
  base.clauses = std::move(clauses_);
  pair_.psi1 = base;
  pair_.psi2 = std::move(base);
  link(r.x, r.e[root], pair_.plan.root);
  pair_.psi1.clauses.push_back(clauses_.back());
  link(r.x, r.o[root], pair_.plan.root);
  pair_.psi2.clauses.push_back(clauses_.back());
  anchors_.pop_back();
  pair_.plan.clause_anchor = std::move(anchors_);
  pair_.plan.incidence = ltd_.incidence;
  pair_.out_td = output_decomposition(pair_);
  return std::move(pair_);
}

} // namespace

ReductionPair reduce_impl(const Formula &f, const LabeledTreeDecomposition &ltd) {
  return Builder(f, ltd, Variant::impl).run();
}

ReductionPair reduce_monotone(const Formula &f, const LabeledTreeDecomposition &ltd) {
  return Builder(f, ltd, Variant::monotone).run();
}

ReductionPair reduce_cubic_bipartite(const Formula &f, const LabeledTreeDecomposition &ltd) {
  return Builder(f, ltd, Variant::cubic_bipartite).run();
}

ReductionPair reduce(Variant v, const Formula &f, const LabeledTreeDecomposition &ltd) {
  switch (v) {
  case Variant::impl: return reduce_impl(f, ltd);
  case Variant::monotone: return reduce_monotone(f, ltd);
  case Variant::cubic_bipartite: return reduce_cubic_bipartite(f, ltd);
  }
  throw PreconditionError("unknown variant");
}

TreeDecomposition anchored_decomposition(const std::vector<int> &parent, int root, int num_vars,
                                         const std::vector<const Clause *> &clauses,
                                         const std::vector<int> &anchors) {
  TreeDecomposition td;
  td.parent = parent;
  td.root = root;
  int n = static_cast<int>(parent.size());
  td.bags.assign(n, {});
  std::vector<int> depth(n, -1);
  for (int u = 0; u < n; ++u) {
    std::vector<int> path;
    int w = u;
    while (w >= 0 && depth[w] < 0) {
      path.push_back(w);
      w = parent[w];
    }
    int d = w < 0 ? -1 : depth[w];
    for (auto it = path.rbegin(); it != path.rend(); ++it) depth[*it] = ++d;
  }

  std::vector<std::vector<int>> at(num_vars + 1);
  for (std::size_t i = 0; i < clauses.size(); ++i)
    for (Literal l : *clauses[i]) at[l.var].push_back(anchors[i]);

  std::vector<int> mark(n, 0);
  auto lca = [&](int a, int b) {
    while (depth[a] > depth[b]) a = parent[a];
    while (depth[b] > depth[a]) b = parent[b];
    while (a != b) {
      a = parent[a];
      b = parent[b];
    }
    return a;
  };
  for (int v = 1; v <= num_vars; ++v) {
    auto &nodes = at[v];
    if (nodes.empty()) {
      td.add_node({v}, root);
      mark.push_back(0);
      continue;
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    int top = nodes[0];
    for (int u : nodes) top = lca(top, u);
    for (int u : nodes) {
      while (mark[u] != v) {
        mark[u] = v;
        td.bags[u].push_back(v);
        if (u == top) break;
        u = parent[u];
      }
    }
  }
  return td;
}

TreeDecomposition output_decomposition(const ReductionPair &pair) {
  std::vector<const Clause *> cls;
  std::vector<int> anchors = pair.plan.clause_anchor;
  for (const auto &c : pair.psi1.clauses) cls.push_back(&c);
  cls.push_back(&pair.psi2.clauses.back());
  anchors.push_back(pair.plan.root);
  return anchored_decomposition(pair.plan.parent, pair.plan.root, pair.psi1.num_vars, cls, anchors);
}

TreeDecomposition incidence_output_decomposition(const ReductionPair &pair) {
  TreeDecomposition td = output_decomposition(pair);
  int n = pair.psi1.num_vars;
  int m = static_cast<int>(pair.psi1.clauses.size());
  for (int i = 0; i < m; ++i) {
    std::vector<int> bag{n + i + 1};
    for (Literal l : pair.psi1.clauses[i]) bag.push_back(l.var);
    if (i + 1 == m)
      for (Literal l : pair.psi2.clauses.back()) bag.push_back(l.var);
    td.add_node(bag, pair.plan.clause_anchor[i]);
  }
  return td;
}

void write_aux_map(const ReductionPair &pair, std::ostream &out) {
  const auto &names = pair.registry.names;
  for (std::size_t v = pair.registry.source_vars + 1; v < names.size(); ++v)
    out << "c aux " << names[v] << ' ' << v << '\n';
}

} // namespace cnfred
