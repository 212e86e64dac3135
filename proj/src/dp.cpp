#include <algorithm>
#include <array>

#include "cnfred/counting.hpp"
#include "cnfred/errors.hpp"

namespace cnfred {

namespace {

namespace mp = boost::multiprecision;
using U256 = mp::number<mp::cpp_int_backend<256, 256, mp::unsigned_magnitude, mp::unchecked, void>>;
using U512 = mp::number<mp::cpp_int_backend<512, 512, mp::unsigned_magnitude, mp::unchecked, void>>;


constexpr int kMaxBag = 30;

Count to_count(unsigned __int128 v) {
  Count hi = static_cast<std::uint64_t>(v >> 64);
  return (hi << 64) + Count(static_cast<std::uint64_t>(v));
}
template <class N> Count to_count(const N &v) { return Count(v); }

// Bit-gather over up to 32 positions through four byte tables.
struct Gather {
  std::array<std::array<std::uint32_t, 256>, 4> table{};
  explicit Gather(const std::vector<int> &target) { // target[i]: output bit of input bit i, or -1
    for (int byte = 0; byte < 4; ++byte)
      for (int x = 0; x < 256; ++x) {
        std::uint32_t out = 0;
        for (int b = 0; b < 8; ++b) {
          int i = byte * 8 + b;
          if ((x >> b & 1) && i < static_cast<int>(target.size()) && target[i] >= 0) out |= 1u << target[i];
        }
        table[byte][x] = out;
      }
  }
  std::uint32_t operator()(std::uint32_t a) const {
    return table[0][a & 255] | table[1][a >> 8 & 255] | table[2][a >> 16 & 255] | table[3][a >> 24];
  }
};

struct Plan {
  std::vector<std::vector<int>> children;
  std::vector<int> order; // postorder
  std::vector<std::vector<int>> clauses_at;
  int missing = 0; // variables outside every bag; they are free
};

Plan plan_for(const Formula &f, const TreeDecomposition &td) {
  Plan p;
  p.children = td.children();
  p.clauses_at.resize(td.size());
  std::vector<int> depth = td.depths();
  std::vector<std::vector<int>> nodes_of(f.num_vars + 1);
  for (int t = 0; t < td.size(); ++t)
    for (int v : td.bags[t]) {
      if (v < 1 || v > f.num_vars) throw PreconditionError("bag vertex " + std::to_string(v) + " is not a variable");
      nodes_of[v].push_back(t);
    }
  for (int v = 1; v <= f.num_vars; ++v)
    if (nodes_of[v].empty()) ++p.missing;
  for (int c = 0; c < static_cast<int>(f.clauses.size()); ++c) {
    const Clause &cl = f.clauses[c];
    if (cl.empty()) {
      p.clauses_at[td.root].push_back(c);
      continue;
    }
    int best = -1;
    for (int t : nodes_of[cl[0].var]) {
      bool all = std::all_of(cl.begin(), cl.end(), [&](Literal l) { return td.bag_contains(t, l.var); });
      if (all && (best < 0 || depth[t] > depth[best])) best = t;
    }
    if (best < 0) throw PreconditionError("clause " + std::to_string(c + 1) + " is not covered by any bag");
    p.clauses_at[best].push_back(c);
  }
  std::vector<int> pre = td.preorder();
  p.order.assign(pre.rbegin(), pre.rend());
  return p;
}

// Root sums, one per final clause; a null final clause adds no constraint.
using Finals = std::vector<const Clause *>;

template <class N>
std::vector<Count> run(const Formula &f, const TreeDecomposition &td, const Plan &plan, const Finals &finals,
                       DpStats &st) {
  std::vector<std::vector<N>> table(td.size());
  for (int t : plan.order) {
    const auto &bag = td.bags[t];
    int k = static_cast<int>(bag.size());
    std::size_t size = std::size_t{1} << k;
    std::vector<N> cur(size, N(1));
    st.entries += size;

    for (int c : plan.clauses_at[t]) {
      std::uint32_t mask = 0, falsify = 0;
      for (Literal l : f.clauses[c]) {
        int i = static_cast<int>(std::lower_bound(bag.begin(), bag.end(), l.var) - bag.begin());
        mask |= 1u << i;
        if (l.negative) falsify |= 1u << i;
      }
      std::uint32_t free = static_cast<std::uint32_t>(size - 1) & ~mask;
      std::uint32_t s = free;
      while (true) {
        cur[s | falsify] = N(0);
        ++st.ops;
        if (s == 0) break;
        s = (s - 1) & free;
      }
    }

    for (int ch : plan.children[t]) {
      const auto &cbag = td.bags[ch];
      std::vector<int> to_shared(cbag.size(), -1), from_parent(bag.size(), -1);
      int shared = 0;
      for (std::size_t i = 0, j = 0; i < cbag.size(); ++i) {
        while (j < bag.size() && bag[j] < cbag[i]) ++j;
        if (j < bag.size() && bag[j] == cbag[i]) {
          to_shared[i] = shared;
          from_parent[j] = shared;
          ++shared;
        }
      }
      std::vector<N> proj(std::size_t{1} << shared, N(0));
      Gather gc(to_shared), gp(from_parent);
      auto &child = table[ch];
      for (std::uint32_t b = 0; b < child.size(); ++b) {
        if (child[b] != 0) proj[gc(b)] += child[b];
        ++st.ops;
      }
      std::vector<N>().swap(child);
      for (std::uint32_t a = 0; a < size; ++a) {
        if (cur[a] != 0) cur[a] *= proj[gp(a)];
        ++st.ops;
      }
    }
    table[t] = std::move(cur);
  }
  const auto &rbag = td.bags[td.root];
  const auto &rtab = table[td.root];
  std::vector<Count> out;
  for (const Clause *c : finals) {
    std::uint32_t mask = 0, falsify = 0;
    if (c)
      for (Literal l : *c) {
        int i = static_cast<int>(std::lower_bound(rbag.begin(), rbag.end(), l.var) - rbag.begin());
        mask |= 1u << i;
        if (l.negative) falsify |= 1u << i;
      }
    N total = 0;
    for (std::uint32_t a = 0; a < rtab.size(); ++a)
      if (!c || (a & mask) != falsify) total += rtab[a];
    st.ops += rtab.size();
    out.push_back(to_count(total) << plan.missing);
  }
  return out;
}

std::vector<Count> dp_counts(const Formula &f, const TreeDecomposition &td, const Finals &finals, DpStats &st) {
  st.width = std::max(st.width, width(td));
  if (td.size() == 0) {
    for (const Clause &c : f.clauses)
      if (!c.empty()) throw PreconditionError("clause is not covered by any bag");
    st.arithmetic = "none";
    return {f.clauses.empty() ? Count(1) << f.num_vars : Count(0)};
  }
  if (width(td) + 1 > kMaxBag)
    throw LimitError("bag of size " + std::to_string(width(td) + 1) + " exceeds the DP limit of " +
                     std::to_string(kMaxBag));
  Plan plan = plan_for(f, td);
  // Every partial count is at most 2^num_vars.
  if (f.num_vars < 128) {
    st.arithmetic = "u128";
    return run<unsigned __int128>(f, td, plan, finals, st);
  }
  if (f.num_vars < 256) {
    st.arithmetic = "u256";
    return run<U256>(f, td, plan, finals, st);
  }
  if (f.num_vars < 512) {
    st.arithmetic = "u512";
    return run<U512>(f, td, plan, finals, st);
  }
  st.arithmetic = "bigint";
  return run<Count>(f, td, plan, finals, st);
}

} // namespace

Count count_treewidth_dp(const Formula &f, const TreeDecomposition &td, DpStats *stats) {
  if (f.polarity == Polarity::dnf) {
    Count dual = count_treewidth_dp(dualize(f), td, stats);
    return (Count(1) << f.num_vars) - dual;
  }
  DpStats local;
  return dp_counts(f, td, {nullptr}, stats ? *stats : local).front();
}

TreeDecomposition contract_incidence_td(const TreeDecomposition &td, const Formula &psi) {
  int n = psi.num_vars;
  int m = static_cast<int>(psi.clauses.size());
  std::vector<int> into(m, 0);
  for (int c = 0; c < m; ++c) {
    if (psi.clauses[c].size() > 2) throw PreconditionError("contraction needs a 2CNF; clause " +
                                                           std::to_string(c + 1) + " is longer");
    if (!psi.clauses[c].empty()) into[c] = psi.clauses[c][0].var;
  }
  TreeDecomposition out;
  out.parent = td.parent;
  out.root = td.root;
  out.bags.resize(td.size());
  for (int t = 0; t < td.size(); ++t) {
    std::vector<int> bag;
    for (int v : td.bags[t]) {
      if (v <= n) bag.push_back(v);
      else if (v - n - 1 < m && into[v - n - 1] > 0) bag.push_back(into[v - n - 1]);
    }
    std::sort(bag.begin(), bag.end());
    bag.erase(std::unique(bag.begin(), bag.end()), bag.end());
    out.bags[t] = std::move(bag);
  }
  return out;
}

PairCounts count_pair(const ReductionPair &pair, DpStats *stats) {
  PairCounts pc;
  if (pair.plan.incidence) {
    TreeDecomposition inc = incidence_output_decomposition(pair);
    pc.psi1 = count_treewidth_dp(pair.psi1, contract_incidence_td(inc, pair.psi1), stats);
    pc.psi2 = count_treewidth_dp(pair.psi2, contract_incidence_td(inc, pair.psi2), stats);
    return pc;
  }
  const auto &td = pair.out_td;
  if (pair.psi1.clauses.empty() || pair.psi2.clauses.empty()) {
    pc.psi1 = count_treewidth_dp(pair.psi1, td, stats);
    pc.psi2 = count_treewidth_dp(pair.psi2, td, stats);
    return pc;
  }
  // The two formulas share all clauses but the last, which sits at the root.
  const Clause &c1 = pair.psi1.clauses.back(), &c2 = pair.psi2.clauses.back();
  auto at_root = [&](const Clause &c) {
    return std::all_of(c.begin(), c.end(), [&](Literal l) { return td.size() > 0 && td.bag_contains(td.root, l.var); });
  };
  if (pair.psi1.num_vars != pair.psi2.num_vars || pair.psi1.clauses.size() != pair.psi2.clauses.size() ||
      !at_root(c1) || !at_root(c2) ||
      !std::equal(pair.psi1.clauses.begin(), pair.psi1.clauses.end() - 1, pair.psi2.clauses.begin())) {
    pc.psi1 = count_treewidth_dp(pair.psi1, td, stats);
    pc.psi2 = count_treewidth_dp(pair.psi2, td, stats);
    return pc;
  }
  Formula base = pair.psi1;
  base.clauses.pop_back();
  DpStats local;
  auto both = dp_counts(base, td, {&c1, &c2}, stats ? *stats : local);
  pc.psi1 = both[0];
  pc.psi2 = both[1];
  return pc;
}

Count count_via_reduction(const Formula &f, const LabeledTreeDecomposition &ltd, DpStats *stats) {
  if (f.polarity == Polarity::dnf)
    return (Count(1) << f.num_vars) - count_via_reduction(dualize(f), ltd, stats);
  ReductionPair pair = reduce_impl(f, ltd);
  Count diff = count_pair(pair, stats).difference();
  if (diff < 0) throw Error("reduction produced a negative count");
  return diff;
}

} // namespace cnfred
