#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cnfred/reduction.hpp"

namespace cnfred::cli {

enum Exit { ok = 0, failed = 1, usage = 2 };

struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string td_path;
  std::string variant = "impl";
  std::string method = "dp";
  std::string mode;
  std::uint64_t seed = 1;
  int limit = 24;                            // brute-force variable cap
  std::uint64_t budget = std::uint64_t{1} << 26; // enumeration probes
  std::string out_dir;
  bool json = false;
  bool execute = false;
  bool sampled = false;
  std::string psi1_path, psi2_path; // verify: replace the constructed formulas
};

Variant parse_variant(const std::string &s);

// Width bound of the constructed decomposition for input width w, or nothing
// when the variant has no additive bound.
std::optional<int> width_bound(Variant v, int w, bool incidence);

int cmd_reduce(const RunConfig &cfg, std::ostream &out);
int cmd_count(const RunConfig &cfg, std::ostream &out);
int cmd_combine(const RunConfig &cfg, std::ostream &out);
int cmd_verify(const RunConfig &cfg, std::ostream &out);

// Parses argv and dispatches; library errors become exit code 2 with a
// diagnostic on err.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace cnfred::cli
