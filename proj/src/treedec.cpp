#include "cnfred/treedec.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cnfred/errors.hpp"

namespace cnfred {

int TreeDecomposition::add_node(std::vector<int> bag, int parent_node) {
  std::sort(bag.begin(), bag.end());
  bag.erase(std::unique(bag.begin(), bag.end()), bag.end());
  bags.push_back(std::move(bag));
  parent.push_back(parent_node);
  return size() - 1;
}

std::vector<std::vector<int>> TreeDecomposition::children() const {
  std::vector<std::vector<int>> ch(size());
  for (int t = 0; t < size(); ++t)
    if (parent[t] >= 0) ch[parent[t]].push_back(t);
  return ch;
}

std::vector<int> TreeDecomposition::preorder() const {
  auto ch = children();
  std::vector<int> order, stack{root};
  if (bags.empty()) return order;
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    order.push_back(t);
    for (auto it = ch[t].rbegin(); it != ch[t].rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::vector<int> TreeDecomposition::depths() const {
  std::vector<int> d(size(), 0);
  for (int t : preorder())
    if (parent[t] >= 0) d[t] = d[parent[t]] + 1;
  return d;
}

bool TreeDecomposition::bag_contains(int node, int vertex) const {
  const auto &b = bags[node];
  return std::binary_search(b.begin(), b.end(), vertex);
}

int width(const TreeDecomposition &td) {
  int w = -1;
  for (const auto &b : td.bags) w = std::max(w, static_cast<int>(b.size()) - 1);
  return w;
}

std::optional<std::string> validation_error(const TreeDecomposition &td, const Graph &g) {
  int n = td.size();
  if (n == 0) {
    if (g.num_vertices == 0) return std::nullopt;
    return "decomposition has no bags";
  }
  if (static_cast<int>(td.parent.size()) != n) return "parent array size mismatch";
  if (td.root < 0 || td.root >= n || td.parent[td.root] != -1) return "root has a parent";
  for (int t = 0; t < n; ++t)
    if (t != td.root && (td.parent[t] < 0 || td.parent[t] >= n))
      return "node " + std::to_string(t + 1) + " has no valid parent";
  if (static_cast<int>(td.preorder().size()) != n) return "tree is not connected";

  std::vector<std::vector<int>> trace(g.num_vertices + 1);
  for (int t = 0; t < n; ++t) {
    const auto &b = td.bags[t];
    if (!std::is_sorted(b.begin(), b.end()) || std::adjacent_find(b.begin(), b.end()) != b.end())
      return "bag " + std::to_string(t + 1) + " is not a sorted set";
    for (int v : b) {
      if (v < 1 || v > g.num_vertices)
        return "bag " + std::to_string(t + 1) + " holds unknown vertex " + std::to_string(v);
      trace[v].push_back(t);
    }
  }
  for (int v = 1; v <= g.num_vertices; ++v) {
    if (trace[v].empty()) return "vertex " + std::to_string(v) + " appears in no bag";
    int tops = 0;
    for (int t : trace[v]) {
      int p = td.parent[t];
      if (p < 0 || !td.bag_contains(p, v)) ++tops;
    }
    if (tops != 1) return "trace of vertex " + std::to_string(v) + " is disconnected";
  }
  for (auto [u, v] : g.edges) {
    const auto &a = trace[u], &b = trace[v];
    std::size_t i = 0, j = 0;
    bool found = false;
    while (i < a.size() && j < b.size() && !found) {
      if (a[i] == b[j]) found = true;
      else if (a[i] < b[j]) ++i;
      else ++j;
    }
    if (!found)
      return "edge {" + std::to_string(u) + "," + std::to_string(v) + "} is not covered";
  }
  return std::nullopt;
}

void validate(const TreeDecomposition &td, const Graph &g) {
  if (auto err = validation_error(td, g)) throw ValidationError(*err);
}

TreeDecomposition parse_td(std::istream &in, const Graph &g) {
  std::string line;
  int lineno = 0;
  long long nbags = -1, nverts = -1, wplus = -1;
  std::vector<std::vector<int>> bags;
  std::vector<bool> seen;
  std::vector<std::pair<int, int>> tree_edges;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head) || head == "c") continue;
    if (head == "s") {
      std::string td;
      if (nbags >= 0 || !(ls >> td >> nbags >> wplus >> nverts) || td != "td" || nbags < 0 ||
          nverts < 0 || wplus < 0)
        throw ParseError(ParseErrorKind::malformed_header, lineno, line);
      bags.assign(nbags, {});
      seen.assign(nbags, false);
      continue;
    }
    if (nbags < 0) throw ParseError(ParseErrorKind::malformed_header, lineno, "missing s-line");
    auto number = [&](const std::string &tok) {
      std::size_t used = 0;
      long long x = -1;
      try {
        x = std::stoll(tok, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used != tok.size()) throw ParseError(ParseErrorKind::bad_token, lineno, tok);
      return x;
    };
    if (head == "b") {
      std::string tok;
      if (!(ls >> tok)) throw ParseError(ParseErrorKind::bad_token, lineno, line);
      long long id = number(tok);
      if (id < 1 || id > nbags || seen[id - 1])
        throw ParseError(ParseErrorKind::bad_token, lineno, "bag id " + tok);
      seen[id - 1] = true;
      while (ls >> tok) {
        long long v = number(tok);
        if (v < 1 || v > nverts)
          throw ParseError(ParseErrorKind::literal_out_of_range, lineno, "vertex " + tok);
        bags[id - 1].push_back(static_cast<int>(v));
      }
      continue;
    }
    std::string other;
    if (!(ls >> other)) throw ParseError(ParseErrorKind::bad_token, lineno, line);
    long long a = number(head), b = number(other);
    if (a < 1 || b < 1 || a > nbags || b > nbags || a == b)
      throw ParseError(ParseErrorKind::bad_token, lineno, "tree edge " + line);
    tree_edges.emplace_back(static_cast<int>(a - 1), static_cast<int>(b - 1));
  }
  if (nbags < 0) throw ParseError(ParseErrorKind::malformed_header, lineno, "missing s-line");
  if (nverts != g.num_vertices)
    throw ValidationError("decomposition declares " + std::to_string(nverts) +
                          " vertices, graph has " + std::to_string(g.num_vertices));
  for (long long i = 0; i < nbags; ++i)
    if (!seen[i]) throw ValidationError("bag " + std::to_string(i + 1) + " is never defined");
  if (nbags > 0 && static_cast<long long>(tree_edges.size()) != nbags - 1)
    throw ValidationError("tree needs exactly #bags-1 edges");

  TreeDecomposition td;
  td.bags = std::move(bags);
  for (auto &b : td.bags) {
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  td.parent.assign(nbags, -2);
  td.root = 0;
  if (nbags > 0) {
    std::vector<std::vector<int>> adj(nbags);
    for (auto [a, b] : tree_edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    td.parent[0] = -1;
    std::vector<int> stack{0};
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      for (int u : adj[t]) {
        if (u == td.parent[t]) continue;
        if (td.parent[u] != -2) throw ValidationError("tree edges contain a cycle");
        td.parent[u] = t;
        stack.push_back(u);
      }
    }
    for (long long i = 0; i < nbags; ++i)
      if (td.parent[i] == -2) throw ValidationError("tree is not connected");
  }
  if (width(td) + 1 > wplus)
    throw ValidationError("bag larger than the declared width+1 of " + std::to_string(wplus));
  validate(td, g);
  return td;
}

TreeDecomposition parse_td(const std::string &text, const Graph &g) {
  std::istringstream in(text);
  return parse_td(in, g);
}

TreeDecomposition read_td_file(const std::string &path, const Graph &g) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_td(in, g);
}

static void write_td_body(const TreeDecomposition &td, std::ostream &out) {
  for (int t = 0; t < td.size(); ++t) {
    out << "b " << t + 1;
    for (int v : td.bags[t]) out << ' ' << v;
    out << '\n';
  }
  for (int t = 0; t < td.size(); ++t)
    if (td.parent[t] >= 0) out << td.parent[t] + 1 << ' ' << t + 1 << '\n';
}

void write_td(const TreeDecomposition &td, int num_vertices, std::ostream &out) {
  out << "s td " << td.size() << ' ' << width(td) + 1 << ' ' << num_vertices << '\n';
  if (td.root != 0) out << "c root " << td.root + 1 << '\n';
  write_td_body(td, out);
}

void write_labeled_td(const LabeledTreeDecomposition &ltd, int num_vertices, std::ostream &out) {
  const auto &td = ltd.base;
  out << "s td " << td.size() << ' ' << width(td) + 1 << ' ' << num_vertices << '\n';
  if (td.root != 0) out << "c root " << td.root + 1 << '\n';
  for (int t = 0; t < td.size(); ++t) {
    const Label &l = ltd.label[t];
    if (l.kind == Label::Kind::clause) out << "c label " << t + 1 << " clause " << l.index + 1 << '\n';
    if (l.kind == Label::Kind::variable) out << "c label " << t + 1 << " var " << l.index << '\n';
  }
  write_td_body(td, out);
}

TreeDecomposition trivial_td(const Formula &f) {
  TreeDecomposition td;
  std::vector<int> all(f.num_vars);
  for (int v = 1; v <= f.num_vars; ++v) all[v - 1] = v;
  int m = static_cast<int>(f.clauses.size());
  for (int i = 0; i <= m; ++i) td.add_node(all, i < m ? i + 1 : -1);
  td.root = m;
  return td;
}

std::vector<int> LabeledTreeDecomposition::preorder() const {
  std::vector<int> order, stack{base.root};
  if (base.bags.empty()) return order;
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    order.push_back(t);
    for (auto it = child_order[t].rbegin(); it != child_order[t].rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::vector<int> LabeledTreeDecomposition::leaves() const {
  std::vector<int> out;
  for (int t : preorder())
    if (is_leaf(t)) out.push_back(t);
  return out;
}

namespace {

// Children ordered by the minimum node index found in their subtree.
std::vector<std::vector<int>> ordered_children(const TreeDecomposition &td) {
  auto ch = td.children();
  auto pre = td.preorder();
  std::vector<int> minsub(td.size());
  for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
    int t = *it;
    minsub[t] = t;
    for (int c : ch[t]) minsub[t] = std::min(minsub[t], minsub[c]);
  }
  for (auto &list : ch)
    std::sort(list.begin(), list.end(), [&](int a, int b) { return minsub[a] < minsub[b]; });
  return ch;
}

} // namespace

LabeledTreeDecomposition label_td(const TreeDecomposition &td, const Formula &f, bool fully,
                                  bool incidence) {
  if (td.size() == 0) throw PreconditionError("empty decomposition");
  TreeDecomposition t = td;

  auto ch = ordered_children(t);
  int original = t.size();
  for (int u = 0; u < original; ++u) {
    const auto list = ch[u];
    if (list.size() <= 2) continue;
    int cur = u;
    for (std::size_t i = 0; i + 2 < list.size(); ++i) {
      t.parent[list[i]] = cur;
      cur = t.add_node(t.bags[u], cur);
    }
    t.parent[list[list.size() - 2]] = cur;
    t.parent[list.back()] = cur;
  }

  int base_size = t.size();
  auto depth = t.depths();
  std::vector<int> nchildren(base_size, 0);
  for (int u = 0; u < base_size; ++u)
    if (t.parent[u] >= 0) ++nchildren[t.parent[u]];

  int max_vertex = f.num_vars + (incidence ? static_cast<int>(f.clauses.size()) : 0);
  std::vector<std::vector<int>> trace(max_vertex + 1);
  for (int u = 0; u < base_size; ++u)
    for (int v : t.bags[u])
      if (v >= 1 && v <= max_vertex) trace[v].push_back(u);

  std::vector<Label> label(base_size);
  std::vector<int> top(base_size);
  for (int u = 0; u < base_size; ++u) top[u] = u;

  auto place = [&](Label l, const std::vector<int> &need) {
    std::vector<int> covering;
    if (need.empty()) {
      for (int u = 0; u < base_size; ++u) covering.push_back(u);
    } else {
      int pivot = need[0];
      for (int v : need)
        if (trace[v].size() < trace[pivot].size()) pivot = v;
      for (int u : trace[pivot]) {
        bool ok = true;
        for (int v : need) ok = ok && t.bag_contains(u, v);
        if (ok) covering.push_back(u);
      }
    }
    if (covering.empty()) {
      std::string what = l.kind == Label::Kind::clause ? "clause " + std::to_string(l.index + 1)
                                                       : "variable " + std::to_string(l.index);
      throw PreconditionError(what + " is not covered by any bag");
    }
    int best = -1, topmost = covering[0];
    for (int u : covering) {
      if (depth[u] < depth[topmost]) topmost = u;
      if (nchildren[u] != 1 || !label[u].empty()) continue;
      if (best < 0 || depth[u] > depth[best]) best = u;
    }
    if (best >= 0) {
      label[best] = l;
      return;
    }
    int above = top[topmost];
    int d = t.add_node(t.bags[topmost], t.parent[above]);
    t.parent[above] = d;
    if (t.root == above) t.root = d;
    label.push_back(l);
    top[topmost] = d;
  };

  for (int i = 0; i < static_cast<int>(f.clauses.size()); ++i) {
    std::vector<int> need;
    if (incidence) need.push_back(f.num_vars + i + 1);
    else
      for (Literal l : f.clauses[i]) need.push_back(l.var);
    place(Label::clause(i), need);
  }
  if (fully)
    for (int v = 1; v <= f.num_vars; ++v) place(Label::variable(v), {v});

  LabeledTreeDecomposition ltd;
  ltd.child_order = ordered_children(t);
  ltd.base = std::move(t);
  ltd.label = std::move(label);
  ltd.fully = fully;
  ltd.incidence = incidence;
  return ltd;
}

std::optional<std::string> labeled_validation_error(const LabeledTreeDecomposition &ltd,
                                                    const Formula &f) {
  const auto &t = ltd.base;
  int n = t.size();
  if (static_cast<int>(ltd.label.size()) != n || static_cast<int>(ltd.child_order.size()) != n)
    return "label or child_order size mismatch";
  Graph g = ltd.incidence ? incidence_graph(f) : primal_graph(f);
  if (auto err = validation_error(t, g)) return err;
  auto ch = t.children();
  std::vector<int> clause_hits(f.clauses.size(), 0), var_hits(f.num_vars + 1, 0);
  for (int u = 0; u < n; ++u) {
    auto sorted = ltd.child_order[u];
    std::sort(sorted.begin(), sorted.end());
    if (sorted != ch[u]) return "child_order of node " + std::to_string(u + 1) + " is inconsistent";
    if (ch[u].size() > 2) return "node " + std::to_string(u + 1) + " has more than two children";
    const Label &l = ltd.label[u];
    if (l.empty()) continue;
    if (ch[u].size() != 1)
      return "labeled node " + std::to_string(u + 1) + " must have exactly one child";
    if (l.kind == Label::Kind::clause) {
      if (l.index < 0 || l.index >= static_cast<int>(f.clauses.size())) return "bad clause label";
      ++clause_hits[l.index];
      if (ltd.incidence) {
        if (!t.bag_contains(u, f.num_vars + l.index + 1))
          return "clause label not in bag of node " + std::to_string(u + 1);
      } else {
        for (Literal lit : f.clauses[l.index])
          if (!t.bag_contains(u, lit.var))
            return "clause label not covered by bag of node " + std::to_string(u + 1);
      }
    } else {
      if (l.index < 1 || l.index > f.num_vars) return "bad variable label";
      ++var_hits[l.index];
      if (!t.bag_contains(u, l.index))
        return "variable label not in bag of node " + std::to_string(u + 1);
    }
  }
  for (std::size_t i = 0; i < clause_hits.size(); ++i)
    if (clause_hits[i] != 1) return "clause " + std::to_string(i + 1) + " is not labeled exactly once";
  for (int v = 1; v <= f.num_vars; ++v) {
    if (ltd.fully && var_hits[v] != 1)
      return "variable " + std::to_string(v) + " is not labeled exactly once";
    if (!ltd.fully && var_hits[v] != 0) return "variable label outside fully-labeled mode";
  }
  return std::nullopt;
}

std::vector<int> root_to_leaf_rank(const LabeledTreeDecomposition &ltd) {
  std::vector<int> rank(ltd.size(), -1);
  auto pre = ltd.preorder();
  int next = 0;
  for (int t : pre)
    if (ltd.is_leaf(t)) rank[t] = next++;
  for (auto it = pre.rbegin(); it != pre.rend(); ++it)
    if (!ltd.is_leaf(*it)) rank[*it] = rank[ltd.child_order[*it][0]];
  return rank;
}

TreeDecomposition incidence_td_from_primal(const TreeDecomposition &td, const Formula &f) {
  TreeDecomposition out = td;
  auto depth = td.depths();
  for (int i = 0; i < static_cast<int>(f.clauses.size()); ++i) {
    int best = -1;
    for (int u = 0; u < td.size(); ++u) {
      bool ok = true;
      for (Literal l : f.clauses[i]) ok = ok && td.bag_contains(u, l.var);
      if (ok && (best < 0 || depth[u] > depth[best])) best = u;
    }
    if (best < 0) throw PreconditionError("clause " + std::to_string(i + 1) + " is not covered");
    std::vector<int> bag{f.num_vars + i + 1};
    for (Literal l : f.clauses[i]) bag.push_back(l.var);
    out.add_node(bag, best);
  }
  return out;
}

} // namespace cnfred
