#include "cnfred/formula.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cnfred/errors.hpp"

namespace cnfred {

const char *to_string(ParseErrorKind kind) {
  switch (kind) {
  case ParseErrorKind::malformed_header: return "malformed header";
  case ParseErrorKind::literal_out_of_range: return "literal out of range";
  case ParseErrorKind::tautology: return "tautological clause";
  case ParseErrorKind::truncated_clause: return "truncated clause";
  case ParseErrorKind::clause_count_mismatch: return "clause count mismatch";
  case ParseErrorKind::bad_token: return "bad token";
  }
  return "parse error";
}

namespace {

// Returns false if the clause is tautological.
bool collapse(Clause &c) {
  Clause out;
  out.reserve(c.size());
  for (Literal l : c) {
    bool seen = false;
    for (Literal o : out) {
      if (o.var != l.var) continue;
      if (o.negative != l.negative) return false;
      seen = true;
    }
    if (!seen) out.push_back(l);
  }
  c = std::move(out);
  return true;
}

} // namespace

void Formula::add(std::initializer_list<int> lits) {
  add(std::vector<int>(lits));
}

void Formula::add(const std::vector<int> &lits) {
  Clause c;
  c.reserve(lits.size());
  for (int x : lits) {
    if (x == 0) throw PreconditionError("literal 0 in clause");
    c.push_back(Literal::from_dimacs(x));
  }
  add_clause(std::move(c));
}

void Formula::add_clause(Clause c) {
  for (Literal l : c)
    if (l.var < 1 || l.var > num_vars)
      throw PreconditionError("variable " + std::to_string(l.var) + " outside 1.." +
                              std::to_string(num_vars));
  if (!collapse(c)) throw PreconditionError("tautological clause");
  clauses.push_back(std::move(c));
}

std::size_t Formula::size() const {
  std::size_t s = 0;
  for (const auto &c : clauses) s += c.size();
  return s;
}

bool operator==(const Formula &a, const Formula &b) {
  return a.num_vars == b.num_vars && a.polarity == b.polarity && a.clauses == b.clauses;
}

bool same_up_to_order(const Formula &a, const Formula &b) {
  if (a.num_vars != b.num_vars || a.polarity != b.polarity ||
      a.clauses.size() != b.clauses.size())
    return false;
  auto canon = [](const Formula &f) {
    std::vector<Clause> cs = f.clauses;
    for (auto &c : cs) std::sort(c.begin(), c.end());
    std::sort(cs.begin(), cs.end());
    return cs;
  };
  return canon(a) == canon(b);
}

Formula parse_dimacs(std::istream &in) {
  Formula f;
  bool have_header = false;
  long long expected = 0;
  Clause current;
  bool open = false;
  std::string line;
  int lineno = 0;
  int clause_line = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos) continue;
    if (line[p] == 'c') continue;
    if (line[p] == 'p') {
      if (have_header) throw ParseError(ParseErrorKind::malformed_header, lineno, "second header");
      std::istringstream hs(line.substr(p));
      std::string tag, kind, extra;
      long long n = -1, m = -1;
      if (!(hs >> tag >> kind >> n >> m) || tag != "p" || (kind != "cnf" && kind != "dnf") ||
          n < 0 || m < 0 || n > (1 << 30) || (hs >> extra))
        throw ParseError(ParseErrorKind::malformed_header, lineno, line);
      f.num_vars = static_cast<int>(n);
      f.polarity = kind == "dnf" ? Polarity::dnf : Polarity::cnf;
      expected = m;
      have_header = true;
      continue;
    }
    if (!have_header)
      throw ParseError(ParseErrorKind::malformed_header, lineno, "clause data before header");
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      long long x = 0;
      std::size_t used = 0;
      try {
        x = std::stoll(tok, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used != tok.size()) throw ParseError(ParseErrorKind::bad_token, lineno, tok);
      if (x == 0) {
        if (!collapse(current))
          throw ParseError(ParseErrorKind::tautology, clause_line, "clause contains v and -v");
        f.clauses.push_back(std::move(current));
        current.clear();
        open = false;
        continue;
      }
      long long v = x < 0 ? -x : x;
      if (v > f.num_vars)
        throw ParseError(ParseErrorKind::literal_out_of_range, lineno,
                         tok + " exceeds " + std::to_string(f.num_vars));
      if (!open) clause_line = lineno;
      open = true;
      current.push_back(Literal::from_dimacs(static_cast<int>(x)));
    }
  }
  if (!have_header) throw ParseError(ParseErrorKind::malformed_header, lineno, "missing header");
  if (open) throw ParseError(ParseErrorKind::truncated_clause, clause_line, "missing terminating 0");
  if (static_cast<long long>(f.clauses.size()) != expected)
    throw ParseError(ParseErrorKind::clause_count_mismatch, lineno,
                     "header says " + std::to_string(expected) + ", found " +
                         std::to_string(f.clauses.size()));
  return f;
}

Formula parse_dimacs(const std::string &text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

void serialize_dimacs(const Formula &f, std::ostream &out) {
  out << "p " << (f.polarity == Polarity::dnf ? "dnf" : "cnf") << ' ' << f.num_vars << ' '
      << f.clauses.size() << '\n';
  for (const auto &c : f.clauses) {
    for (Literal l : c) out << l.to_dimacs() << ' ';
    out << "0\n";
  }
}

std::string serialize_dimacs(const Formula &f) {
  std::ostringstream out;
  serialize_dimacs(f, out);
  return out.str();
}

Formula read_dimacs_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_dimacs(in);
}

void write_dimacs_file(const Formula &f, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  serialize_dimacs(f, out);
}

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(num_vertices + 1);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

bool Graph::has_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
}

static void finish(Graph &g) {
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
}

Graph primal_graph(const Formula &f) {
  Graph g;
  g.num_vertices = f.num_vars;
  g.kind.assign(f.num_vars + 1, VertexKind::variable);
  for (const auto &c : f.clauses)
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        int u = c[i].var, v = c[j].var;
        g.edges.emplace_back(std::min(u, v), std::max(u, v));
      }
  finish(g);
  return g;
}

Graph incidence_graph(const Formula &f) {
  Graph g;
  int m = static_cast<int>(f.clauses.size());
  g.num_vertices = f.num_vars + m;
  g.kind.assign(g.num_vertices + 1, VertexKind::variable);
  for (int i = 0; i < m; ++i) {
    int cv = f.num_vars + i + 1;
    g.kind[cv] = VertexKind::clause;
    for (Literal l : f.clauses[i]) g.edges.emplace_back(l.var, cv);
  }
  finish(g);
  return g;
}

const char *to_string(FragmentTag tag) {
  switch (tag) {
  case FragmentTag::general: return "general";
  case FragmentTag::cnf3: return "cnf3";
  case FragmentTag::two_cnf: return "two_cnf";
  case FragmentTag::horn2: return "horn2";
  case FragmentTag::mon2: return "mon2";
  case FragmentTag::impl2: return "impl2";
  case FragmentTag::two_dnf: return "two_dnf";
  case FragmentTag::zero_one_2dnf: return "zero_one_2dnf";
  case FragmentTag::mon2dnf: return "mon2dnf";
  }
  return "?";
}

FragmentTag classify_fragment(const Formula &f) {
  std::size_t longest = 0;
  bool all_pos_pairs = true, all_neg_pairs = true, all_impl = true, any_neg_neg = false;
  for (const auto &c : f.clauses) {
    longest = std::max(longest, c.size());
    int negs = 0;
    for (Literal l : c) negs += l.negative;
    bool binary = c.size() == 2;
    all_pos_pairs = all_pos_pairs && binary && negs == 0;
    all_neg_pairs = all_neg_pairs && binary && negs == 2;
    all_impl = all_impl && binary && negs == 1;
    any_neg_neg = any_neg_neg || (binary && negs == 2);
  }
  if (f.polarity == Polarity::dnf) {
    if (longest > 2) return FragmentTag::general;
    if (all_pos_pairs || all_neg_pairs) return FragmentTag::mon2dnf;
    if (all_impl) return FragmentTag::zero_one_2dnf;
    return FragmentTag::two_dnf;
  }
  if (longest > 3) return FragmentTag::general;
  if (longest == 3) return FragmentTag::cnf3;
  if (all_pos_pairs) return FragmentTag::mon2;
  if (all_impl) return FragmentTag::impl2;
  if (!any_neg_neg) return FragmentTag::horn2;
  return FragmentTag::two_cnf;
}

Formula dualize(const Formula &f) {
  Formula d = f;
  d.polarity = f.polarity == Polarity::cnf ? Polarity::dnf : Polarity::cnf;
  for (auto &c : d.clauses)
    for (auto &l : c) l.negative = !l.negative;
  return d;
}

std::vector<int> occurrences(const Formula &f) {
  std::vector<int> occ(f.num_vars + 1, 0);
  for (const auto &c : f.clauses)
    for (Literal l : c) ++occ[l.var];
  return occ;
}

Formula shifted(const Formula &f, int offset, int num_vars) {
  Formula g(num_vars, f.polarity);
  g.clauses = f.clauses;
  for (auto &c : g.clauses)
    for (auto &l : c) l.var += offset;
  return g;
}

Formula disjoint_union(const Formula &a, const Formula &b) {
  Formula u = a;
  u.num_vars = a.num_vars + b.num_vars;
  for (auto c : b.clauses) {
    for (auto &l : c) l.var += a.num_vars;
    u.clauses.push_back(std::move(c));
  }
  return u;
}

} // namespace cnfred
