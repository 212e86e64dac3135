#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cnfred/formula.hpp"
#include "cnfred/treedec.hpp"

namespace cnfred {

enum class Variant { impl, monotone, cubic_bipartite };

const char *to_string(Variant v);

// Fresh-variable bookkeeping. Zero marks an absent variable. Per-node vectors
// are indexed by node of the labeled decomposition the pair was built from.
struct AuxRegistry {
  int source_vars = 0;
  int x = 0; // x, or its positive counterpart in the monotone variant

  // Per clause: chosen / not chosen, plus the copy chains of the cubic variant.
  std::vector<int> chosen, unchosen;
  std::vector<int> chosen1, chosen2, unchosen1, unchosen2;

  // Per node. In the monotone variant o1..e2 hold the positive case
  // variables, which are false exactly when the case is taken.
  std::vector<int> o, e, o1, o2, e1, e2;
  std::vector<int> o_1, o_2, e_1, e_2; // cubic copies o', o'', e', e''

  // Cubic variant: copy of x feeding the subtree of a node, and the
  // intermediate variable linking it to its parent's copy.
  std::vector<int> handle, handle_link;

  // Monotone variant, per variable.
  std::vector<int> top, bot, var_bar;

  std::vector<std::string> names; // names[v] for every variable, "" for sources

  int allocate(int &counter, std::string name);
};

// The out-decomposition is built from a skeleton tree and one anchor node per
// output clause: every variable is placed on the minimal subtree spanning
// the anchors of its clauses.
struct AnchorPlan {
  std::vector<int> parent; // skeleton tree, -1 at the root
  int root = 0;
  std::vector<int> clause_anchor; // per clause of psi1 (root fact last)
  std::vector<int> node_of;       // skeleton node of each node of the labeled decomposition
  bool incidence = false;         // built from a decomposition of the incidence graph
};

struct ReductionPair {
  Variant variant = Variant::impl;
  Formula psi1, psi2; // identical except for the last clause, the root fact
  AuxRegistry registry;
  AnchorPlan plan;
  TreeDecomposition out_td;
};

ReductionPair reduce_impl(const Formula &f, const LabeledTreeDecomposition &ltd);
ReductionPair reduce_monotone(const Formula &f, const LabeledTreeDecomposition &ltd);
ReductionPair reduce_cubic_bipartite(const Formula &f, const LabeledTreeDecomposition &ltd);
ReductionPair reduce(Variant v, const Formula &f, const LabeledTreeDecomposition &ltd);

// Rewrites f into 3CNF where every variable occurs at most three times and
// never three times with one sign, and no clause has three literals of one
// sign. The count is preserved exactly.
struct Normalized {
  Formula formula;
  LabeledTreeDecomposition ltd;
  std::vector<int> origin; // origin[v]: source variable that v copies, 0 for connectors
};
Normalized normalize_3cnf(const Formula &f, const LabeledTreeDecomposition &ltd);

// Decomposition of the primal graphs of both psi1 and psi2.
TreeDecomposition output_decomposition(const ReductionPair &pair);

// Decomposition of the incidence graphs of both psi1 and psi2 (clause i of
// psi is vertex num_vars + i + 1).
TreeDecomposition incidence_output_decomposition(const ReductionPair &pair);

// Builds bags for a skeleton tree from per-clause anchors.
TreeDecomposition anchored_decomposition(const std::vector<int> &parent, int root, int num_vars,
                                         const std::vector<const Clause *> &clauses,
                                         const std::vector<int> &anchors);

void write_aux_map(const ReductionPair &pair, std::ostream &out);

} // namespace cnfred
