#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cnfred {

struct Literal {
  int var = 0;
  bool negative = false;

  static Literal pos(int v) { return {v, false}; }
  static Literal neg(int v) { return {v, true}; }
  static Literal from_dimacs(int x) { return {x < 0 ? -x : x, x < 0}; }

  int to_dimacs() const { return negative ? -var : var; }
  Literal operator~() const { return {var, !negative}; }

  auto operator<=>(const Literal &) const = default;
};

using Clause = std::vector<Literal>;

enum class Polarity { cnf, dnf };

// A clause list over variables 1..num_vars. Under dnf polarity the same
// structure is read as a disjunction of terms.
struct Formula {
  int num_vars = 0;
  std::vector<Clause> clauses;
  Polarity polarity = Polarity::cnf;

  Formula() = default;
  explicit Formula(int n, Polarity p = Polarity::cnf) : num_vars(n), polarity(p) {}

  // Appends a clause given in DIMACS literal notation. Duplicate literals are
  // collapsed; tautologies and out-of-range variables throw.
  void add(std::initializer_list<int> lits);
  void add(const std::vector<int> &lits);
  void add_clause(Clause c);

  int fresh() { return ++num_vars; }
  std::size_t size() const; // total number of literal occurrences
};

bool operator==(const Formula &a, const Formula &b);

// Equality up to clause order and literal order within clauses.
bool same_up_to_order(const Formula &a, const Formula &b);

Formula parse_dimacs(std::istream &in);
Formula parse_dimacs(const std::string &text);
void serialize_dimacs(const Formula &f, std::ostream &out);
std::string serialize_dimacs(const Formula &f);
Formula read_dimacs_file(const std::string &path);
void write_dimacs_file(const Formula &f, const std::string &path);

enum class VertexKind : std::uint8_t { variable, clause };

// Vertices are 1-based. Incidence graphs place clause i at vertex num_vars+i+1.
struct Graph {
  int num_vertices = 0;
  std::vector<std::pair<int, int>> edges; // sorted, u < v, no duplicates
  std::vector<VertexKind> kind;           // index 0 unused

  std::vector<std::vector<int>> adjacency() const;
  bool has_edge(int u, int v) const;
};

Graph primal_graph(const Formula &f);
Graph incidence_graph(const Formula &f);

enum class FragmentTag {
  general,
  cnf3,
  two_cnf,
  horn2,
  mon2,
  impl2,
  two_dnf,
  zero_one_2dnf,
  mon2dnf,
};

const char *to_string(FragmentTag tag);
FragmentTag classify_fragment(const Formula &f);

Formula dualize(const Formula &f);

// Occurrences per variable (index 0 unused).
std::vector<int> occurrences(const Formula &f);

// Disjoint union: the variables of b are shifted by a.num_vars.
Formula disjoint_union(const Formula &a, const Formula &b);
Formula shifted(const Formula &f, int offset, int num_vars);

} // namespace cnfred
