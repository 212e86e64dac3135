#include <algorithm>
#include <numeric>

#include "cnfred/errors.hpp"
#include "cnfred/reduction.hpp"

namespace cnfred {

namespace {

// Contracts every tree edge whose one bag contains the other.
TreeDecomposition contract_nested(const TreeDecomposition &td) {
  int n = td.size();
  std::vector<int> parent = td.parent;
  std::vector<std::vector<int>> bags = td.bags;
  std::vector<bool> alive(n, true);
  auto subset = [](const std::vector<int> &a, const std::vector<int> &b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  std::vector<int> order = td.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int u = *it, p = parent[u];
    if (p < 0) continue;
    if (subset(bags[u], bags[p])) {
      alive[u] = false;
    } else if (subset(bags[p], bags[u])) {
      bags[p] = std::move(bags[u]);
      alive[u] = false;
    } else {
      continue;
    }
    for (int w = 0; w < n; ++w)
      if (alive[w] && parent[w] == u) parent[w] = p;
  }
  TreeDecomposition out;
  std::vector<int> id(n, -1);
  for (int u : order)
    if (alive[u]) id[u] = out.add_node(bags[u], parent[u] < 0 ? -1 : id[parent[u]]);
  out.root = id[td.root];
  return out;
}

} // namespace

Normalized normalize_3cnf(const Formula &f, const LabeledTreeDecomposition &ltd) {
  if (auto err = labeled_validation_error(ltd, f))
    throw PreconditionError("labeled decomposition: " + *err);

  std::vector<int> parent = ltd.base.parent;
  auto side = [&](int p) {
    parent.push_back(p);
    return static_cast<int>(parent.size()) - 1;
  };
  std::vector<int> home(f.clauses.size(), ltd.base.root);
  for (int t = 0; t < ltd.size(); ++t)
    if (ltd.label[t].kind == Label::Kind::clause) home[ltd.label[t].index] = t;

  Formula g(f.num_vars);
  std::vector<int> origin(f.num_vars + 1);
  std::iota(origin.begin(), origin.end(), 0);
  std::vector<int> anchor;
  auto emit = [&](Clause c, int a) {
    g.clauses.push_back(std::move(c));
    anchor.push_back(a);
  };

  // Every clause of f expands into a few 3-clauses, each placed on its own
  // node of a path hanging below the clause's home node. Long clauses become
  // a chain over connectors a_i equivalent to the disjunction of the
  // remaining suffix. A clause l1 v l2 v l3 of one sign gets l3 replaced by
  // an equivalent literal of the other sign over a fresh z.
  auto fresh = [&] {
    origin.push_back(0);
    return g.fresh();
  };
  for (std::size_t ci = 0; ci < f.clauses.size(); ++ci) {
    const Clause &c = f.clauses[ci];
    int k = static_cast<int>(c.size());
    std::vector<Clause> parts;
    if (k <= 3) {
      parts.push_back(c);
    } else {
      int conn = k - 3;
      std::vector<int> a(conn + 1);
      for (int i = 1; i <= conn; ++i) a[i] = fresh();
      parts.push_back({c[0], c[1], Literal::pos(a[1])});
      for (int i = 1; i < conn; ++i) {
        parts.push_back({Literal::neg(a[i]), c[i + 1], Literal::pos(a[i + 1])});
        parts.push_back({~c[i + 1], Literal::pos(a[i])});
        parts.push_back({Literal::neg(a[i + 1]), Literal::pos(a[i])});
      }
      parts.push_back({Literal::neg(a[conn]), c[k - 2], c[k - 1]});
      parts.push_back({~c[k - 2], Literal::pos(a[conn])});
      parts.push_back({~c[k - 1], Literal::pos(a[conn])});
    }
    int below = home[ci];
    for (Clause &p : parts) {
      bool one_sign = p.size() == 3 && p[0].negative == p[1].negative && p[1].negative == p[2].negative;
      Literal l3 = p.empty() ? Literal{} : p.back();
      Literal flip;
      if (one_sign) {
        int z = fresh();
        flip = l3.negative ? Literal::pos(z) : Literal::neg(z);
        p[2] = flip;
      }
      below = side(below);
      emit(std::move(p), below);
      if (one_sign) {
        below = side(below);
        emit({~flip, l3}, below);
        below = side(below);
        emit({flip, ~l3}, below);
      }
    }
  }

  // Skeleton preorder positions order the copies along the tree.
  int n = static_cast<int>(parent.size());
  std::vector<std::vector<int>> kids(n);
  for (int u = 0; u < n; ++u)
    if (parent[u] >= 0) kids[parent[u]].push_back(u);
  std::vector<int> pos(n, 0), stack{ltd.base.root};
  int next = 0;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    pos[u] = next++;
    for (auto it = kids[u].rbegin(); it != kids[u].rend(); ++it) stack.push_back(*it);
  }

  struct Occ {
    int clause, slot;
  };
  std::vector<std::vector<Occ>> occ(g.num_vars + 1);
  for (int i = 0; i < static_cast<int>(g.clauses.size()); ++i)
    for (int j = 0; j < static_cast<int>(g.clauses[i].size()); ++j)
      occ[g.clauses[i][j].var].push_back({i, j});

  int vars_before = g.num_vars;
  for (int v = 1; v <= vars_before; ++v) {
    auto &list = occ[v];
    int k = static_cast<int>(list.size());
    bool same_sign = true;
    for (const Occ &o : list)
      same_sign = same_sign && g.clauses[o.clause][o.slot].negative ==
                                   g.clauses[list[0].clause][list[0].slot].negative;
    if (k <= 2 || (k == 3 && !same_sign)) continue;
    std::stable_sort(list.begin(), list.end(), [&](const Occ &x, const Occ &y) {
      return pos[anchor[x.clause]] < pos[anchor[y.clause]];
    });
    std::vector<int> copy(k);
    copy[0] = v;
    for (int j = 1; j < k; ++j) {
      copy[j] = g.fresh();
      origin.push_back(origin[v]);
    }
    for (int j = 1; j < k; ++j) g.clauses[list[j].clause][list[j].slot].var = copy[j];
    for (int j = 0; j < k; ++j) {
      int to = (j + 1) % k;
      emit({Literal::neg(copy[j]), Literal::pos(copy[to])}, anchor[list[to].clause]);
    }
  }

  std::vector<const Clause *> cls;
  for (const auto &c : g.clauses) cls.push_back(&c);
  TreeDecomposition td = anchored_decomposition(parent, ltd.base.root, g.num_vars, cls, anchor);
  Normalized out;
  out.ltd = label_td(contract_nested(td), g, false);
  out.formula = std::move(g);
  out.origin = std::move(origin);
  return out;
}

} // namespace cnfred
