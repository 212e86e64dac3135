#include "kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <bit>

namespace cnfred::detail {

// Two blocks per iteration, one per 64-bit lane.
std::uint64_t count_blocks_neon(const CompiledCnf &f, std::uint64_t first, std::uint64_t count) {
  int n = f.num_vars;
  std::vector<uint64x2_t> val(2 * static_cast<std::size_t>(n));
  for (int v = 0; v < n && v < 6; ++v) {
    val[2 * v] = vdupq_n_u64(kLowPattern[v]);
    val[2 * v + 1] = vdupq_n_u64(~kLowPattern[v]);
  }
  std::size_t m = f.start.size() - 1;
  std::uint64_t total = 0;
  std::uint64_t b = first, end = first + count;
  for (; b + 2 <= end; b += 2) {
    for (int v = 6; v < n; ++v) {
      int s = v - 6;
      std::uint64_t lanes[2] = {0 - ((b >> s) & 1), 0 - (((b + 1) >> s) & 1)};
      uint64x2_t w = vld1q_u64(lanes);
      val[2 * v] = w;
      val[2 * v + 1] = veorq_u64(w, vdupq_n_u64(~0ull));
    }
    uint64x2_t sat = vdupq_n_u64(~0ull);
    for (std::size_t c = 0; c < m; ++c) {
      uint64x2_t any = vdupq_n_u64(0);
      for (std::uint32_t i = f.start[c]; i < f.start[c + 1]; ++i) any = vorrq_u64(any, val[f.lits[i]]);
      sat = vandq_u64(sat, any);
    }
    total += std::popcount(vgetq_lane_u64(sat, 0)) + std::popcount(vgetq_lane_u64(sat, 1));
  }
  if (b < end) total += count_blocks_scalar(f, b, end - b);
  return total;
}

} // namespace cnfred::detail

#else

namespace cnfred::detail {
std::uint64_t count_blocks_neon(const CompiledCnf &f, std::uint64_t first, std::uint64_t count) {
  return count_blocks_scalar(f, first, count);
}
} // namespace cnfred::detail

#endif
