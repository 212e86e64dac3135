#pragma once

#include <cstdint>
#include <vector>

namespace cnfred::detail {

// Clauses as literal codes 2*(v-1)+negative, delimited by start offsets.
struct CompiledCnf {
  int num_vars = 0;
  std::vector<std::uint32_t> start; // size = clauses + 1
  std::vector<std::uint32_t> lits;
};

// Number of satisfying assignments among blocks [first, first+count). Block b
// fixes variables 7.. to the bits of b; variables 1..6 vary inside the word.
std::uint64_t count_blocks_scalar(const CompiledCnf &f, std::uint64_t first, std::uint64_t count);
std::uint64_t count_blocks_avx2(const CompiledCnf &f, std::uint64_t first, std::uint64_t count);
std::uint64_t count_blocks_neon(const CompiledCnf &f, std::uint64_t first, std::uint64_t count);

// Patterns of variables 1..6 across a 64-assignment word.
inline constexpr std::uint64_t kLowPattern[6] = {
    0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
    0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};

// Mask of valid assignments inside a word when fewer than 6 variables exist.
inline std::uint64_t word_mask(int num_vars) {
  return num_vars >= 6 ? ~0ull : ((1ull << (1u << num_vars)) - 1);
}

} // namespace cnfred::detail
