#include "cnfred/counting.hpp"
#include "cnfred/errors.hpp"
#include "kernels.hpp"

namespace cnfred {

const char *to_string(Kernel k) {
  switch (k) {
  case Kernel::automatic: return "automatic";
  case Kernel::scalar: return "scalar";
  case Kernel::avx2: return "avx2";
  case Kernel::neon: return "neon";
  }
  return "?";
}

bool kernel_available(Kernel k) {
  switch (k) {
  case Kernel::automatic:
  case Kernel::scalar: return true;
  case Kernel::avx2:
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
  case Kernel::neon:
#if defined(__aarch64__)
    return true;
#else
    return false;
#endif
  }
  return false;
}

Kernel resolve_kernel(Kernel k) {
  if (k != Kernel::automatic) {
    if (!kernel_available(k)) throw PreconditionError(std::string("kernel not available: ") + to_string(k));
    return k;
  }
  if (kernel_available(Kernel::avx2)) return Kernel::avx2;
  if (kernel_available(Kernel::neon)) return Kernel::neon;
  return Kernel::scalar;
}

Count count_bruteforce(const Formula &f, int limit, Kernel kernel) {
  if (f.num_vars > limit)
    throw LimitError("brute force over " + std::to_string(f.num_vars) + " variables exceeds limit " +
                     std::to_string(limit));
  if (f.num_vars > 62) throw LimitError("brute force is capped at 62 variables");
  if (f.polarity == Polarity::dnf) return (Count(1) << f.num_vars) - count_bruteforce(dualize(f), limit, kernel);

  detail::CompiledCnf cf;
  cf.num_vars = f.num_vars;
  cf.start.push_back(0);
  for (const Clause &c : f.clauses) {
    for (Literal l : c) cf.lits.push_back(2u * static_cast<unsigned>(l.var - 1) + (l.negative ? 1 : 0));
    cf.start.push_back(static_cast<std::uint32_t>(cf.lits.size()));
  }
  std::uint64_t blocks = f.num_vars > 6 ? 1ull << (f.num_vars - 6) : 1;
  std::uint64_t total = 0;
  switch (resolve_kernel(kernel)) {
  case Kernel::avx2: total = detail::count_blocks_avx2(cf, 0, blocks); break;
  case Kernel::neon: total = detail::count_blocks_neon(cf, 0, blocks); break;
  default: total = detail::count_blocks_scalar(cf, 0, blocks); break;
  }
  return Count(total);
}

} // namespace cnfred
