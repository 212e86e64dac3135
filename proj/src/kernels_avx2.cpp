#include "kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#include <bit>

namespace cnfred::detail {

// Four blocks per iteration, one per 64-bit lane.
std::uint64_t count_blocks_avx2(const CompiledCnf &f, std::uint64_t first, std::uint64_t count) {
  int n = f.num_vars;
  // Four lanes per literal code.
  std::vector<std::uint64_t> val(8 * static_cast<std::size_t>(n));
  auto lit = [&](std::uint32_t code) {
    return _mm256_loadu_si256(reinterpret_cast<const __m256i *>(&val[4 * code]));
  };
  auto put = [&](std::uint32_t code, __m256i w) {
    _mm256_storeu_si256(reinterpret_cast<__m256i *>(&val[4 * code]), w);
  };
  for (int v = 0; v < n && v < 6; ++v) {
    put(2 * v, _mm256_set1_epi64x(static_cast<long long>(kLowPattern[v])));
    put(2 * v + 1, _mm256_set1_epi64x(static_cast<long long>(~kLowPattern[v])));
  }
  const __m256i ones = _mm256_set1_epi64x(-1);
  std::size_t m = f.start.size() - 1;
  std::uint64_t total = 0;
  std::uint64_t b = first, end = first + count;
  for (; b + 4 <= end; b += 4) {
    for (int v = 6; v < n; ++v) {
      int s = v - 6;
      __m256i w = _mm256_set_epi64x(-static_cast<long long>(((b + 3) >> s) & 1),
                                    -static_cast<long long>(((b + 2) >> s) & 1),
                                    -static_cast<long long>(((b + 1) >> s) & 1),
                                    -static_cast<long long>((b >> s) & 1));
      put(2 * v, w);
      put(2 * v + 1, _mm256_xor_si256(w, ones));
    }
    __m256i sat = ones;
    for (std::size_t c = 0; c < m; ++c) {
      __m256i any = _mm256_setzero_si256();
      for (std::uint32_t i = f.start[c]; i < f.start[c + 1]; ++i) any = _mm256_or_si256(any, lit(f.lits[i]));
      sat = _mm256_and_si256(sat, any);
      if (_mm256_testz_si256(sat, sat)) break;
    }
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i *>(lanes), sat);
    for (std::uint64_t w : lanes) total += std::popcount(w);
  }
  if (b < end) total += count_blocks_scalar(f, b, end - b);
  return total;
}

} // namespace cnfred::detail

#else

namespace cnfred::detail {
std::uint64_t count_blocks_avx2(const CompiledCnf &f, std::uint64_t first, std::uint64_t count) {
  return count_blocks_scalar(f, first, count);
}
} // namespace cnfred::detail

#endif
