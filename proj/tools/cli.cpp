#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cnfred/combinators.hpp"
#include "cnfred/counting.hpp"
#include "cnfred/errors.hpp"
#include "cnfred/verification.hpp"

namespace cnfred::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

Variant parse_variant(const std::string &s) {
  if (s == "impl") return Variant::impl;
  if (s == "mon") return Variant::monotone;
  if (s == "cubic") return Variant::cubic_bipartite;
  throw PreconditionError("unknown variant " + s);
}

std::optional<int> width_bound(Variant v, int w, bool incidence) {
  switch (v) {
  case Variant::impl: return w + (incidence ? 14 : 13);
  case Variant::cubic_bipartite: return 3 * w + (incidence ? 15 : 14);
  case Variant::monotone: return std::nullopt;
  }
  return std::nullopt;
}

namespace {

struct Input {
  Formula f;
  TreeDecomposition td;
  bool incidence = false;
};

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// The decomposition may cover the primal or the incidence graph; the vertex
// count in its header decides.
Input load(const RunConfig &cfg) {
  Input in;
  in.f = read_dimacs_file(cfg.inputs.at(0));
  if (cfg.td_path.empty()) {
    in.td = trivial_td(in.f);
    return in;
  }
  std::string text = slurp(cfg.td_path);
  try {
    in.td = parse_td(text, primal_graph(in.f));
  } catch (const ValidationError &primal) {
    if (in.f.clauses.empty()) throw;
    try {
      in.td = parse_td(text, incidence_graph(in.f));
      in.incidence = true;
    } catch (const ValidationError &) {
      throw primal;
    }
  }
  return in;
}

struct Prepared {
  Formula f; // the reduced formula, normalized in the cubic variant
  LabeledTreeDecomposition ltd;
  ReductionPair pair;
  int input_width = 0;
};

Prepared prepare(const Input &in, Variant v) {
  if (in.f.polarity != Polarity::cnf) throw PreconditionError("the reduction needs a CNF");
  Prepared p;
  p.input_width = width(in.td);
  auto ltd = label_td(in.td, in.f, v == Variant::monotone, in.incidence);
  if (v == Variant::cubic_bipartite) {
    Normalized nz = normalize_3cnf(in.f, ltd);
    p.f = std::move(nz.formula);
    p.ltd = std::move(nz.ltd);
  } else {
    p.f = in.f;
    p.ltd = std::move(ltd);
  }
  p.pair = reduce(v, p.f, p.ltd);
  return p;
}

TreeDecomposition constructed_td(const Prepared &p, bool incidence) {
  return incidence ? incidence_output_decomposition(p.pair) : p.pair.out_td;
}

int td_vertices(const Formula &f, bool incidence) {
  return f.num_vars + (incidence ? static_cast<int>(f.clauses.size()) : 0);
}

fs::path out_dir(const RunConfig &cfg) {
  fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_td_file(const fs::path &path, const TreeDecomposition &td, int vertices) {
  std::ostringstream s;
  write_td(td, vertices, s);
  write_file(path, s.str());
}

} // namespace

int cmd_reduce(const RunConfig &cfg, std::ostream &out) {
  Input in = load(cfg);
  Variant v = parse_variant(cfg.variant);
  Prepared p = prepare(in, v);
  fs::path dir = out_dir(cfg);
  write_file(dir / "psi1.cnf", serialize_dimacs(p.pair.psi1));
  write_file(dir / "psi2.cnf", serialize_dimacs(p.pair.psi2));
  std::ostringstream aux;
  write_aux_map(p.pair, aux);
  write_file(dir / "aux.map", aux.str());
  TreeDecomposition otd = constructed_td(p, in.incidence);
  write_td_file(dir / "out.td", otd, td_vertices(p.pair.psi1, in.incidence));

  int ow = width(otd);
  auto bound = width_bound(v, p.input_width, in.incidence);
  bool pass = !bound || ow <= *bound;
  if (cfg.json) {
    ordered_json j;
    j["variant"] = to_string(v);
    j["files"] = {"psi1.cnf", "psi2.cnf", "aux.map", "out.td"};
    j["num_vars"] = p.pair.psi1.num_vars;
    j["num_clauses"] = p.pair.psi1.clauses.size();
    j["incidence"] = in.incidence;
    j["input_width"] = p.input_width;
    j["output_width"] = ow;
    j["width_bound"] = bound ? ordered_json(*bound) : ordered_json(nullptr);
    j["width_ok"] = pass;
    out << j.dump(2) << '\n';
  } else {
    out << "variant " << to_string(v) << '\n';
    out << "psi1 " << (dir / "psi1.cnf").string() << " (" << p.pair.psi1.num_vars << " vars, "
        << p.pair.psi1.clauses.size() << " clauses)\n";
    out << "psi2 " << (dir / "psi2.cnf").string() << '\n';
    out << "aux " << (dir / "aux.map").string() << '\n';
    out << "td " << (dir / "out.td").string() << (in.incidence ? " (incidence)" : "") << '\n';
    out << "width " << ow << " from input width " << p.input_width;
    if (bound) out << ", bound " << *bound << ": " << (pass ? "pass" : "FAIL") << '\n';
    else out << ", no additive bound for this variant\n";
  }
  return pass ? ok : failed;
}

int cmd_count(const RunConfig &cfg, std::ostream &out) {
  Input in = load(cfg);
  Count c;
  if (cfg.method == "brute") {
    c = count_bruteforce(in.f, cfg.limit);
  } else if (cfg.method == "dp") {
    if (in.incidence) throw PreconditionError("the dp method needs a decomposition of the primal graph");
    c = count_treewidth_dp(in.f, in.td);
  } else if (cfg.method == "reduction") {
    bool dnf = in.f.polarity == Polarity::dnf;
    Input cnf = in;
    if (dnf) cnf.f = dualize(in.f);
    Prepared p = prepare(cnf, parse_variant(cfg.variant));
    c = count_pair(p.pair).difference();
    if (dnf) c = (Count(1) << in.f.num_vars) - c;
  } else {
    throw PreconditionError("unknown method " + cfg.method);
  }
  if (cfg.json) {
    ordered_json j;
    j["method"] = cfg.method;
    j["count"] = c.str();
    out << j.dump(2) << '\n';
  } else {
    out << c << '\n';
  }
  return ok;
}

namespace {

PipelineMode parse_mode(const std::string &s) {
  if (s == "gapp-impl") return PipelineMode::gapp_impl_two_call;
  if (s == "gapp-mon") return PipelineMode::gapp_mon_two_call;
  if (s == "gapp-cubic") return PipelineMode::gapp_cubic_two_call;
  if (s == "dnf-pad") return PipelineMode::dnf_pad_two_call;
  if (s == "single-mon") return PipelineMode::single_mon;
  if (s == "single-impl") return PipelineMode::single_impl;
  throw PreconditionError("unknown mode " + s);
}

// The gapp modes accept a single formula phi and then count #phi - 0 against
// the unsatisfiable empty clause.
Formula unsatisfiable() {
  Formula f(0);
  f.add_clause({});
  return f;
}

} // namespace

int cmd_combine(const RunConfig &cfg, std::ostream &out) {
  PipelineMode mode = parse_mode(cfg.mode);
  bool gapp = mode == PipelineMode::gapp_impl_two_call || mode == PipelineMode::gapp_mon_two_call ||
              mode == PipelineMode::gapp_cubic_two_call;
  if (cfg.inputs.size() > 2 || (cfg.inputs.size() < 2 && !gapp))
    throw CLI::ValidationError("combine " + cfg.mode + " takes two formulas");
  Formula a = read_dimacs_file(cfg.inputs[0]);
  Formula b = cfg.inputs.size() > 1 ? read_dimacs_file(cfg.inputs[1]) : unsatisfiable();

  PipelineCertificate cert;
  switch (mode) {
  case PipelineMode::gapp_impl_two_call: cert = two_call_certificate(mode, gapp_impl_two_call(a, b)); break;
  case PipelineMode::gapp_mon_two_call: cert = two_call_certificate(mode, gapp_mon_two_call(a, b)); break;
  case PipelineMode::gapp_cubic_two_call: cert = two_call_certificate(mode, gapp_cubic_two_call(a, b)); break;
  case PipelineMode::dnf_pad_two_call:
    cert = two_call_certificate(dnf_pad_two_call({a, trivial_td(a)}, {b, trivial_td(b)}));
    break;
  case PipelineMode::single_mon: cert = single_call_mon(a, b); break;
  case PipelineMode::single_impl: cert = single_call_impl(a, b); break;
  }

  fs::path dir = out_dir(cfg);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < cert.formulas.size(); ++i) {
    const Decomposed &d = cert.formulas[i];
    std::string stem = cert.formulas.size() == 1 ? "combined" : (i == 0 ? "first" : "second");
    std::string name = stem + (d.formula.polarity == Polarity::dnf ? ".dnf" : ".cnf");
    write_file(dir / name, serialize_dimacs(d.formula));
    write_td_file(dir / (stem + ".td"), d.td, d.formula.num_vars);
    files.push_back(name);
  }
  write_file(dir / "certificate.json", certificate_json(cert, files) + "\n");

  std::vector<Count> counts;
  std::optional<Recovery> rec;
  if (cfg.execute) {
    for (const Decomposed &d : cert.formulas) counts.push_back(count_treewidth_dp(d.formula, d.td));
    rec = restricted_eval(cert.recovery, counts);
  }

  if (cfg.json) {
    ordered_json j;
    j["mode"] = to_string(cert.mode);
    j["files"] = files;
    j["certificate"] = "certificate.json";
    if (rec) {
      ordered_json cs = ordered_json::array();
      for (const Count &c : counts) cs.push_back(c.str());
      j["counts"] = cs;
      j["first"] = rec->first.str();
      j["second"] = rec->second.str();
      j["result"] = rec->result.str();
    }
    out << j.dump(2) << '\n';
    return ok;
  }
  out << "mode " << to_string(cert.mode) << '\n';
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Decomposed &d = cert.formulas[i];
    out << "formula " << (dir / files[i]).string() << " (" << d.formula.num_vars << " vars, "
        << d.formula.clauses.size() << " clauses, width " << width(d.td) << ")\n";
  }
  out << "certificate " << (dir / "certificate.json").string() << '\n';
  if (rec) {
    for (std::size_t i = 0; i < counts.size(); ++i) out << "count " << files[i] << ' ' << counts[i] << '\n';
    out << "first " << rec->first << '\n';
    out << "second " << rec->second << '\n';
    out << "result " << rec->result << '\n';
  }
  return ok;
}

int cmd_verify(const RunConfig &cfg, std::ostream &out) {
  Input in = load(cfg);
  Variant v = parse_variant(cfg.variant);
  Prepared p = prepare(in, v);
  auto replace = [&](const std::string &path, Formula &psi) {
    if (path.empty()) return;
    Formula r = read_dimacs_file(path);
    if (r.num_vars != psi.num_vars)
      throw PreconditionError(path + " has " + std::to_string(r.num_vars) + " variables, expected " +
                              std::to_string(psi.num_vars));
    psi = std::move(r);
  };
  replace(cfg.psi1_path, p.pair.psi1);
  replace(cfg.psi2_path, p.pair.psi2);

  BijectionOptions opt;
  opt.budget = cfg.budget;
  opt.allow_sampling = cfg.sampled;
  opt.seed = cfg.seed;
  BijectionReport b;
  try {
    b = check_bijection(p.f, p.pair, p.ltd, opt);
  } catch (const LimitError &e) {
    throw LimitError(std::string(e.what()) + "; rerun with --sampled or a larger --budget");
  }

  StructureRequirements req;
  req.fragment = v == Variant::monotone ? FragmentTag::mon2 : FragmentTag::impl2;
  if (v == Variant::cubic_bipartite) {
    req.max_occurrence = 3;
    req.bipartite = true;
  }
  StructureReport s = audit_structure(p.pair.psi1, req);
  if (s.ok) s = audit_structure(p.pair.psi2, req);

  int lw = width(p.ltd.base);
  int additive = v == Variant::monotone ? lw + 13 : (in.incidence ? 14 : 13);
  WidthReport w = audit_width(p.ltd, p.pair, constructed_td(p, in.incidence), additive, in.incidence);

  std::string json = report_json(b, s, w);
  if (!cfg.out_dir.empty()) write_file(out_dir(cfg) / "report.json", json);
  bool pass = b.ok() && s.ok && w.ok;
  if (cfg.json) {
    out << json;
    return pass ? ok : failed;
  }
  out << "bijection " << (b.ok() ? "pass" : "FAIL");
  if (b.sampled) {
    out << " (sampled spot checks)\n";
  } else {
    out << " (models " << b.models1 << '/' << b.models2 << ", rogue " << b.rogue1 << '/' << b.rogue2
        << ", non-rogue " << b.nonrogue1 << '/' << b.nonrogue2 << ", difference " << b.difference << ", expected "
        << b.expected << ")\n";
  }
  if (!b.failure.empty()) out << "  " << b.failure << '\n';
  out << "structure " << (s.ok ? "pass" : "FAIL") << " (" << to_string(s.fragment) << ", max occurrence "
      << s.max_occurrence << (s.bipartite ? ", bipartite" : ", not bipartite") << ")\n";
  if (!s.ok) out << "  " << s.violation << '\n';
  out << "width " << (w.ok ? "pass" : "FAIL") << " (input " << w.input_width << ", output " << w.output_width
      << ", bound " << w.bound << ")\n";
  if (!w.ok) out << "  " << w.violation << '\n';
  out << "result " << (pass ? "pass" : "FAIL") << '\n';
  return pass ? ok : failed;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  RunConfig cfg;
  CLI::App app{"Counting reductions from #SAT to #2SAT"};
  app.require_subcommand(1);

  auto variant = [&](CLI::App *sub) {
    sub->add_option("--variant", cfg.variant, "impl, mon or cubic")
        ->check(CLI::IsMember({"impl", "mon", "cubic"}))
        ->capture_default_str();
  };
  auto td = [&](CLI::App *sub) {
    sub->add_option("--td", cfg.td_path, "decomposition in .td format (primal or incidence graph)")
        ->check(CLI::ExistingFile);
  };

  auto *reduce = app.add_subcommand("reduce", "write psi1.cnf, psi2.cnf, aux.map and out.td");
  reduce->add_option("cnf", cfg.inputs, "input formula")->required()->expected(1)->check(CLI::ExistingFile);
  td(reduce);
  variant(reduce);
  reduce->add_option("--out", cfg.out_dir, "output directory");
  reduce->add_flag("--json", cfg.json, "print a JSON summary");

  auto *count = app.add_subcommand("count", "print the number of models");
  count->add_option("cnf", cfg.inputs, "input formula")->required()->expected(1)->check(CLI::ExistingFile);
  count->add_option("--method", cfg.method, "brute, dp or reduction")
      ->check(CLI::IsMember({"brute", "dp", "reduction"}))
      ->capture_default_str();
  td(count);
  variant(count);
  count->add_option("--limit", cfg.limit, "variable cap for brute force")->capture_default_str();
  count->add_flag("--json", cfg.json, "print JSON");

  auto *combine = app.add_subcommand("combine", "write combined formulas and a recovery certificate");
  combine->add_option("formulas", cfg.inputs, "one or two input formulas")
      ->required()
      ->expected(1, 2)
      ->check(CLI::ExistingFile);
  combine->add_option("--mode", cfg.mode, "gapp-impl, gapp-mon, gapp-cubic, dnf-pad, single-mon or single-impl")
      ->required()
      ->check(CLI::IsMember({"gapp-impl", "gapp-mon", "gapp-cubic", "dnf-pad", "single-mon", "single-impl"}));
  combine->add_option("--out", cfg.out_dir, "output directory");
  combine->add_flag("--execute", cfg.execute, "count the formulas and run the recovery program");
  combine->add_flag("--json", cfg.json, "print JSON");

  auto *verify = app.add_subcommand("verify", "check the rogue-model bijection and the structural audits");
  verify->add_option("cnf", cfg.inputs, "input formula")->required()->expected(1)->check(CLI::ExistingFile);
  td(verify);
  variant(verify);
  verify->add_option("--budget", cfg.budget, "enumeration budget in variable assignments")->capture_default_str();
  verify->add_flag("--sampled", cfg.sampled, "fall back to sampled spot checks beyond the budget");
  verify->add_option("--seed", cfg.seed, "seed for sampling")->capture_default_str();
  verify->add_option("--psi1", cfg.psi1_path, "use this formula as psi1")->check(CLI::ExistingFile);
  verify->add_option("--psi2", cfg.psi2_path, "use this formula as psi2")->check(CLI::ExistingFile);
  verify->add_option("--out", cfg.out_dir, "directory for report.json");
  verify->add_flag("--json", cfg.json, "print the JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (reduce->parsed()) return cmd_reduce(cfg, out);
    if (count->parsed()) return cmd_count(cfg, out);
    if (combine->parsed()) return cmd_combine(cfg, out);
    return cmd_verify(cfg, out);
  } catch (const CLI::Error &e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
  }
  return usage;
}

} // namespace cnfred::cli
