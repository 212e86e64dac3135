#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "cnfred/formula.hpp"
#include "cnfred/reduction.hpp"
#include "cnfred/treedec.hpp"

namespace cnfred {

using Count = boost::multiprecision::cpp_int;

inline constexpr int kDefaultBruteForceLimit = 24;

// Clause-evaluation kernels for brute force. All variants evaluate 64
// assignments per machine word; automatic picks the widest one the CPU runs.
enum class Kernel { automatic, scalar, avx2, neon };

const char *to_string(Kernel k);
bool kernel_available(Kernel k);
Kernel resolve_kernel(Kernel k);

Count count_bruteforce(const Formula &f, int limit = kDefaultBruteForceLimit,
                       Kernel kernel = Kernel::automatic);

struct DpStats {
  std::uint64_t ops = 0;        // additions and multiplications on table entries
  std::uint64_t entries = 0;    // table entries allocated over all nodes
  int width = -1;
  std::string arithmetic;       // integer width the tables ran in
};

// Counts a CNF (or DNF, via 2^n minus the dual) over a decomposition of its
// primal graph. Each clause is checked at its deepest covering node.
Count count_treewidth_dp(const Formula &f, const TreeDecomposition &td, DpStats *stats = nullptr);

// Turns a decomposition of the incidence graph of a 2CNF into one of its
// primal graph by contracting each clause vertex into one of its variables.
TreeDecomposition contract_incidence_td(const TreeDecomposition &td, const Formula &psi);

struct PairCounts {
  Count psi1, psi2;
  Count difference() const { return psi1 - psi2; }
};

// DP counts of both formulas of a pair over its out-decomposition; the
// incidence route is taken when the pair was built from an incidence ltd.
PairCounts count_pair(const ReductionPair &pair, DpStats *stats = nullptr);

Count count_via_reduction(const Formula &f, const LabeledTreeDecomposition &ltd,
                          DpStats *stats = nullptr);

} // namespace cnfred
