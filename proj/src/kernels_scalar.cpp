#include <bit>

#include "kernels.hpp"

namespace cnfred::detail {

std::uint64_t count_blocks_scalar(const CompiledCnf &f, std::uint64_t first, std::uint64_t count) {
  int n = f.num_vars;
  std::vector<std::uint64_t> val(2 * static_cast<std::size_t>(n));
  for (int v = 0; v < n && v < 6; ++v) {
    val[2 * v] = kLowPattern[v];
    val[2 * v + 1] = ~kLowPattern[v];
  }
  std::uint64_t mask = word_mask(n);
  std::size_t m = f.start.size() - 1;
  std::uint64_t total = 0;
  for (std::uint64_t b = first; b < first + count; ++b) {
    for (int v = 6; v < n; ++v) {
      std::uint64_t w = ((b >> (v - 6)) & 1) ? ~0ull : 0;
      val[2 * v] = w;
      val[2 * v + 1] = ~w;
    }
    std::uint64_t sat = mask;
    for (std::size_t c = 0; c < m && sat; ++c) {
      std::uint64_t any = 0;
      for (std::uint32_t i = f.start[c]; i < f.start[c + 1]; ++i) any |= val[f.lits[i]];
      sat &= any;
    }
    total += std::popcount(sat);
  }
  return total;
}

} // namespace cnfred::detail
