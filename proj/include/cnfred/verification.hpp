#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cnfred/counting.hpp"
#include "cnfred/formula.hpp"
#include "cnfred/reduction.hpp"
#include "cnfred/treedec.hpp"

namespace cnfred {

// Truth values indexed by variable; index 0 is unused.
struct Model {
  std::vector<std::uint8_t> value;

  Model() = default;
  explicit Model(int num_vars) : value(num_vars + 1, 0) {}

  bool contains(int v) const { return value[v] != 0; }
  void set(int v, bool b) { value[v] = b ? 1 : 0; }
  int num_vars() const { return static_cast<int>(value.size()) - 1; }
  std::vector<int> true_vars() const;

  bool operator==(const Model &) const = default;
  auto operator<=>(const Model &) const = default;
};

bool satisfies(const Formula &f, const Model &m);
std::string to_string(const Model &m); // true variables, space separated

inline constexpr std::uint64_t kDefaultProbeBudget = std::uint64_t{1} << 26;

// All models of a CNF in lexicographic order, found by backtracking with unit
// propagation. One probe is one variable assignment; exceeding the budget
// throws LimitError.
std::vector<Model> enumerate_models(const Formula &f, std::uint64_t budget = kDefaultProbeBudget,
                                    std::uint64_t *probes = nullptr);

// Random models by randomized backtracking. Returns fewer than count models
// when the formula has fewer or the budget runs out.
std::vector<Model> sample_models(const Formula &f, int count, std::uint64_t seed,
                                 std::uint64_t budget = kDefaultProbeBudget);

enum class RogueCondition { none, i, ii, iii, iiib, iv };

const char *to_string(RogueCondition c);

struct RogueVerdict {
  bool is_rogue = false;
  std::optional<int> witness_node;
  RogueCondition violated_condition = RogueCondition::none;
};

// Conditions violated at node t, in label order; empty when M is not rogue at t.
std::vector<RogueCondition> rogue_conditions_at(const Model &m, const ReductionPair &pair,
                                                const LabeledTreeDecomposition &ltd, int t);

// The witness is the topmost rogue node on the lexicographically smallest
// root-to-leaf path carrying one.
RogueVerdict classify_rogue(const Model &m, const ReductionPair &pair, const LabeledTreeDecomposition &ltd);

Model symmetric_rogue(const Model &m, const ReductionPair &pair, const LabeledTreeDecomposition &ltd);

// Number of labels counted as chosen, and whether the restriction to the
// source variables falsifies every chosen clause.
struct ChoiceParity {
  int chosen = 0;
  bool chosen_falsified = true;
  int falsified = 0; // source clauses falsified by the restriction
};
ChoiceParity choice_parity(const Model &m, const Formula &f, const ReductionPair &pair,
                           const LabeledTreeDecomposition &ltd);

struct BijectionOptions {
  std::uint64_t budget = kDefaultProbeBudget;
  bool allow_sampling = false; // spot-check sampled models when the budget is exceeded
  int samples = 200;
  std::uint64_t seed = 1;
};

struct BijectionReport {
  bool sampled = false;
  std::uint64_t probes = 0;
  Count models1 = 0, models2 = 0;
  Count rogue1 = 0, rogue2 = 0;
  Count nonrogue1 = 0, nonrogue2 = 0;
  Count difference = 0; // nonrogue1 - nonrogue2
  Count expected = 0;   // #formula by brute force
  bool map_ok = false;       // injective, image-exact, rogue-preserving
  bool involution_ok = false;
  bool parity_ok = false;    // chosen-label parity of every non-rogue model
  bool difference_ok = false;
  std::string failure;
  std::optional<Model> counterexample;

  bool ok() const { return map_ok && involution_ok && parity_ok && difference_ok; }
};

BijectionReport check_bijection(const Formula &f, const ReductionPair &pair, const LabeledTreeDecomposition &ltd,
                                const BijectionOptions &options = {});

struct StructureRequirements {
  std::optional<FragmentTag> fragment;
  std::optional<int> max_occurrence;
  bool bipartite = false;
};

struct StructureReport {
  bool ok = true;
  FragmentTag fragment = FragmentTag::general;
  int max_occurrence = 0;
  bool bipartite = true;
  std::string violation; // first violation
};

StructureReport audit_structure(const Formula &f, const StructureRequirements &req);

// Primal graph is two-colourable.
bool is_bipartite(const Formula &f);

struct WidthReport {
  bool ok = true;
  bool valid = true;
  int input_width = 0;
  int output_width = 0;
  int bound = 0;
  std::string violation;
};

// Validates out_td against the primal (or, with incidence, the incidence)
// graphs of both formulas of the pair and checks the additive width bound.
WidthReport audit_width(const LabeledTreeDecomposition &input, const ReductionPair &pair,
                        const TreeDecomposition &out_td, int additive_bound, bool incidence = false);

std::string report_json(const BijectionReport &b, const StructureReport &s, const WidthReport &w);

} // namespace cnfred
