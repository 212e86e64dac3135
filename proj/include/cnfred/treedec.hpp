#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cnfred/formula.hpp"

namespace cnfred {

// Rooted tree of bags. Nodes are 0-based; the .td format numbers them from 1.
struct TreeDecomposition {
  std::vector<int> parent;            // -1 at the root
  std::vector<std::vector<int>> bags; // sorted vertex ids
  int root = 0;

  int size() const { return static_cast<int>(bags.size()); }
  int add_node(std::vector<int> bag, int parent_node);
  std::vector<std::vector<int>> children() const; // ascending node index
  std::vector<int> preorder() const;
  std::vector<int> depths() const;
  bool bag_contains(int node, int vertex) const;
};

int width(const TreeDecomposition &td);

// Returns a description of the first violated property, or nothing.
std::optional<std::string> validation_error(const TreeDecomposition &td, const Graph &g);
void validate(const TreeDecomposition &td, const Graph &g);

TreeDecomposition parse_td(std::istream &in, const Graph &g);
TreeDecomposition parse_td(const std::string &text, const Graph &g);
TreeDecomposition read_td_file(const std::string &path, const Graph &g);
void write_td(const TreeDecomposition &td, int num_vertices, std::ostream &out);

TreeDecomposition trivial_td(const Formula &f);

struct Label {
  enum class Kind { none, clause, variable };
  Kind kind = Kind::none;
  int index = 0; // clause index (0-based) or variable (1-based)

  static Label clause(int c) { return {Kind::clause, c}; }
  static Label variable(int v) { return {Kind::variable, v}; }
  bool empty() const { return kind == Kind::none; }
  bool operator==(const Label &) const = default;
};

struct LabeledTreeDecomposition {
  TreeDecomposition base;
  std::vector<Label> label;
  std::vector<std::vector<int>> child_order;
  bool fully = false;
  // Bags hold incidence-graph vertices: clause i is vertex num_vars + i + 1.
  bool incidence = false;

  int size() const { return base.size(); }
  bool is_leaf(int t) const { return child_order[t].empty(); }
  bool is_join(int t) const { return child_order[t].size() == 2; }
  std::vector<int> preorder() const;
  std::vector<int> leaves() const; // in lexicographic path order
};

// Places every clause (and in fully-labeled mode every variable) on exactly
// one node. Free one-child nodes are used deepest first; once none is left a
// labeled duplicate of the topmost covering node is inserted above it.
LabeledTreeDecomposition label_td(const TreeDecomposition &td, const Formula &f, bool fully,
                                  bool incidence = false);

// Checks every structural invariant of a labeled decomposition.
std::optional<std::string> labeled_validation_error(const LabeledTreeDecomposition &ltd,
                                                    const Formula &f);

// For each node, the index of the lexicographically smallest root-to-leaf
// path through it under child_order.
std::vector<int> root_to_leaf_rank(const LabeledTreeDecomposition &ltd);

void write_labeled_td(const LabeledTreeDecomposition &ltd, int num_vertices, std::ostream &out);

// Incidence decomposition obtained by hanging a leaf bag vars(c) + {c} under a
// node covering each clause c.
TreeDecomposition incidence_td_from_primal(const TreeDecomposition &td, const Formula &f);

} // namespace cnfred
