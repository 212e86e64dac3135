#pragma once

#include <string>
#include <vector>

#include "cnfred/counting.hpp"
#include "cnfred/formula.hpp"
#include "cnfred/treedec.hpp"

namespace cnfred {

enum class SwitchKind { plain, monswitch, relswitch, cycswitch, extcycswitch };

const char *to_string(SwitchKind k);

struct SwitchGadget {
  SwitchKind kind = SwitchKind::plain;
  std::vector<int> fresh_vars;
  std::vector<Clause> clauses;
};

// A formula together with a decomposition of its primal graph.
struct Decomposed {
  Formula formula;
  TreeDecomposition td;
};

// {s -> v | v in v1} and {v' -> s | v' in v2} over the fresh variable s.
SwitchGadget make_switch(const std::vector<int> &v1, const std::vector<int> &v2, int s);

// s_iota v v for v in kappa \ iota and s_tau v v for v in kappa \ tau, with
// s_iota = first_fresh and s_tau = first_fresh + 1.
SwitchGadget monswitch(const std::vector<int> &iota, const std::vector<int> &tau, const std::vector<int> &kappa,
                       int first_fresh);

// s v b for b in bits and s v v for v in vars.
SwitchGadget relswitch(const std::vector<int> &bits, const std::vector<int> &vars, int s);

struct CycSwitch {
  Formula phi1, phi2;  // rewired operands; phi2 is shifted by offset
  int offset = 0;
  int m = 0;            // half the number of cycle positions
  std::vector<int> bits;
  SwitchGadget gadget;
  Decomposed combined;  // phi1 and phi2 and the gadget
};

// Both operands must be implication-only, bipartite and have at most three
// occurrences per variable. The combined count is #phi2 + 2^bits * #phi1.
CycSwitch cycswitch(const Decomposed &a, const Decomposed &b);
CycSwitch extcycswitch(int bits, const Decomposed &a, const Decomposed &b);

// Two formulas whose count difference is the target value.
struct TwoCall {
  Decomposed first, second;
};

// #first - #second = #phi - #phi2.
TwoCall gapp_impl_two_call(const Formula &phi, const TreeDecomposition &td, const Formula &phi2,
                           const TreeDecomposition &td2);
TwoCall gapp_impl_two_call(const Formula &phi, const Formula &phi2);
TwoCall gapp_cubic_two_call(const Formula &phi, const TreeDecomposition &td, const Formula &phi2,
                            const TreeDecomposition &td2);
TwoCall gapp_cubic_two_call(const Formula &phi, const Formula &phi2);
TwoCall gapp_mon_two_call(const Formula &phi, const TreeDecomposition &td, const Formula &phi2,
                          const TreeDecomposition &td2);
TwoCall gapp_mon_two_call(const Formula &phi, const Formula &phi2);

// Pads two implication-only formulas to the same variable count n. Then
// (2^n - #not first) - (2^n - #not second) = #psi - #psi2.
struct DnfPad {
  Decomposed first, second;
  int n_first = 0, n_second = 0;
};
DnfPad dnf_pad_two_call(const Decomposed &psi, const Decomposed &psi2);

// Recovery programs. Registers start with the inputs; each instruction
// appends one register.
enum class Op { mask, shr, div, sub };
enum class Circuit { ac0, tc0 };

const char *to_string(Op op);
const char *to_string(Circuit c);

struct Instr {
  Op op;
  int a = 0; // source register
  int b = 0; // shift width for mask and shr, second register otherwise
};

struct Program {
  Circuit circuit = Circuit::ac0;
  int inputs = 1;
  std::vector<Instr> code;
  int first = 0, second = 0, result = 0; // output registers
};

struct Recovery {
  Count first, second, result;
};

Recovery restricted_eval(const Program &p, const std::vector<Count> &inputs);
Recovery restricted_eval(const Program &p, const Count &count);

enum class PipelineMode {
  gapp_impl_two_call,
  gapp_mon_two_call,
  dnf_pad_two_call,
  single_mon,
  single_impl,
  gapp_cubic_two_call,
};

const char *to_string(PipelineMode m);

struct PipelineCertificate {
  PipelineMode mode = PipelineMode::single_mon;
  std::vector<Decomposed> formulas; // the formulas to count, in input order
  std::vector<int> offsets;         // variable offset of each operand
  int m = 0;
  Program recovery;
};

// #alpha = #phi2 + #phi1 * #phi2 * 2^m with m = n + n' + 1.
PipelineCertificate single_call_mon(const Decomposed &phi1, const Decomposed &phi2);
PipelineCertificate single_call_mon(const Formula &phi1, const Formula &phi2);

// #alpha = #phi2 + 2^m * #phi1 with m = max(n, n').
PipelineCertificate single_call_impl(const Decomposed &phi1, const Decomposed &phi2);
PipelineCertificate single_call_impl(const Formula &phi1, const Formula &phi2);

PipelineCertificate two_call_certificate(PipelineMode mode, const TwoCall &calls);
// The certificate counts the DNF negations of the padded formulas.
PipelineCertificate two_call_certificate(const DnfPad &pad);

std::string certificate_json(const PipelineCertificate &cert, const std::vector<std::string> &files);

} // namespace cnfred
