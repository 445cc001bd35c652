// Acceptance suite: one pass/fail line per criterion, non-zero exit on any
// failure.  Sizes, depths, fuels, and time limits are pinned here.

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fq/capture.hpp"
#include "fq/cli.hpp"
#include "fq/colours.hpp"
#include "fq/oracle.hpp"
#include "fq/parser.hpp"
#include "fq/printer.hpp"
#include "fq/refs.hpp"

using namespace fq;

namespace {

struct Outcome {
  bool pass;
  std::string note;
};

int failures = 0;

template <class F>
void criterion(int n, const std::string& name, double limit_seconds, F body) {
  auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool in_time = limit_seconds <= 0 || secs <= limit_seconds;
  bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << n << ": " << name << "  ["
            << static_cast<int>(secs * 1000) << " ms";
  if (limit_seconds > 0) std::cout << ", limit " << static_cast<int>(limit_seconds) << " s";
  std::cout << "]";
  if (!o.note.empty()) std::cout << "  -- " << o.note;
  if (!in_time) std::cout << "  -- over time limit";
  std::cout << std::endl;
}

std::string run_cli_str(const std::vector<std::string>& args, int* code = nullptr) {
  std::ostringstream out, err;
  int c = run_cli(args, out, err);
  if (code) *code = c;
  return out.str();
}

}  // namespace

// 1. The worked derivation X v Y <: A v B via the CLI, with join
//    introduction and elimination justifying exactly these conclusions.
static Outcome criterion1() {
  int code = 0;
  std::string out = run_cli_str({"sub", "--env", "A<:top,B<:top,X<:A,Y<:B", "X \\/ Y", "A \\/ B"}, &code);
  const std::string expected =
      "sq-join-elim: X \\/ Y <: A \\/ B\n"
      "  sq-join-intro-1: X <: A \\/ B\n"
      "    sq-var: X <: A\n"
      "      sq-refl-var: A <: A\n"
      "  sq-join-intro-2: Y <: A \\/ B\n"
      "    sq-var: Y <: B\n"
      "      sq-refl-var: B <: B\n";
  if (code != 0) return {false, "exit code " + std::to_string(code)};
  if (out != expected) return {false, "unexpected derivation:\n" + out};
  return {true, ""};
}

// 2. Lattice laws of derivability: reflexivity, transitivity, and the
//    lub/glb universal properties over 1,000 seeded samples at depth <= 4.
static Outcome criterion2() {
  GenConfig cfg;
  cfg.count = 1000;
  cfg.seed = 20240501;
  cfg.max_formula_depth = 4;
  cfg.n_qual_vars = 4;
  SuiteReport rep = run_lattice_laws_suite(cfg);
  if (!rep.ok()) return {false, rep.failures.empty() ? "violations" : rep.failures.front()};
  return {true, std::to_string(rep.checked) + " samples"};
}

// 3. Instantiation soundness: 1,000 seeded triples per catalog base
//    lattice; every derivable judgment survives every bound-respecting
//    instantiation.
static Outcome criterion3() {
  int total = 0;
  for (const FiniteLattice& base : catalog_small_lattices()) {
    GenConfig cfg;
    cfg.count = 1000;
    cfg.seed = 774411 + base.size();
    cfg.use_consts = true;
    cfg.n_qual_vars = 2;
    cfg.max_formula_depth = 4;
    SuiteReport rep = run_soundness_agreement_suite(cfg, base);
    if (rep.violations != 0)
      return {false, base.name() + ": " + (rep.failures.empty() ? "violations" : rep.failures.front())};
    total += rep.checked;
  }
  return {true, std::to_string(total) + " triples across 6 bases"};
}

// 4. Textual vs actual joins/meets, exhaustive over every catalog lattice.
static Outcome criterion4() {
  SuiteReport rep = run_textual_join_meet_suite();
  if (!rep.ok()) return {false, rep.failures.empty() ? "violations" : rep.failures.front()};
  return {true, std::to_string(rep.checked) + " pairs"};
}

// 5. Progress & preservation for fq: 500 generated terms, depth <= 5,
//    fuel 500; no stuck states, types shrink only along subtyping.
static Outcome criterion5() {
  GenConfig cfg;
  cfg.count = 500;
  cfg.seed = 555;
  cfg.max_term_depth = 5;
  cfg.fuel = 500;
  SuiteReport rep = run_fq_soundness_suite(cfg);
  if (!rep.ok()) return {false, rep.failures.empty() ? "violations" : rep.failures.front()};
  return {true, std::to_string(rep.checked) + " programs, " +
                    std::to_string(rep.fuel_exhausted) + " fuel-exhausted"};
}

// 6. fm immutability safety: 300 generated store programs with zero
//    SealedWrite and transitive-readonly checked on every dereference, plus
//    50 hand-written negative programs all rejected with E-WRITE-READONLY.
static Outcome criterion6() {
  GenConfig cfg;
  cfg.count = 300;
  cfg.seed = 666;
  cfg.max_term_depth = 5;
  cfg.fuel = 500;
  SuiteReport rep = run_fm_soundness_suite(cfg);
  if (!rep.ok()) return {false, rep.failures.empty() ? "violations" : rep.failures.front()};

  const std::string V = "(fn[bot](x: {bot} Top) => x)";
  const std::string V2 = "(fn[top](y: {bot} Top) => y)";
  const std::string BOXT = "{bot} ({bot} Top -> {bot} Top)";
  std::vector<std::string> tags = {"top", "top \\/ bot", "bot \\/ top", "top /\\ top",
                                   "(bot \\/ top) /\\ top"};
  std::vector<std::string> shapes = {
      "(ref[$T] $V) := $W",
      "(fn[bot](r: {$T} Box $B) => r := $W) (ref[$T] $V)",
      "(fn[bot](r: {$T} Box $B) => (fn[bot](u: {bot} Unit) => u) (r := $W)) (ref[$T] $V)",
      "(fn[bot](r: {$T} Box $B) => r := !r) (ref[$T] $V)",
      "(upqual ($T) (ref[bot] $V)) := $W",
      "(fn[bot](r: {bot} Box $B) => (upqual ($T) r) := $W) (ref[bot] $V)",
      "(fn[bot](b: {bot} Box {$T} Box $B) => (!b) := $W) (ref[bot] (ref[$T] $V))",
      "(fn[bot](u: {bot} Unit) => u) ((ref[$T] $V) := $W)",
      "(tfn[bot](X <: Top) => (ref[$T] $V) := $W) [Top]",
      "!((ref[$T] $V) := $W)",
  };
  auto instantiate = [&](std::string s, const std::string& tag) {
    auto replace_all = [](std::string text, const std::string& from, const std::string& to) {
      std::size_t pos = 0;
      while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
      }
      return text;
    };
    s = replace_all(s, "$T", tag);
    s = replace_all(s, "$V", V);
    s = replace_all(s, "$W", V2);
    s = replace_all(s, "$B", BOXT);
    return s;
  };
  ParseOptions fm;
  fm.calculus = Calculus::Fm;
  int rejected = 0, programs = 0;
  for (const std::string& tag : tags) {
    for (const std::string& shape : shapes) {
      ++programs;
      std::string src = instantiate(shape, tag);
      try {
        TermPtr t = parse_term(src, fm);
        StoreTyping sigma;
        type_of_fm(Env{}, sigma, t);
        return {false, "negative program accepted: " + src};
      } catch (const TypeError& e) {
        if (e.diag().code != diag_code::write_readonly)
          return {false, "wrong code " + e.diag().code + " for: " + src};
        ++rejected;
      }
    }
  }
  if (programs != 50 || rejected != 50)
    return {false, "expected 50 rejected negatives, got " + std::to_string(rejected)};
  return {true, std::to_string(rep.checked) + " programs, 50 negatives rejected"};
}

// 7. fa barrier safety: 300 generated machine programs reach Final with no
//    BarrierViolation; the async-under-sync program is rejected statically
//    and, unchecked, gets stuck at the inner call under the sync barrier.
static Outcome criterion7() {
  GenConfig cfg;
  cfg.count = 300;
  cfg.seed = 777;
  cfg.max_term_depth = 5;
  cfg.fuel = 500;
  SuiteReport rep = run_fa_soundness_suite(cfg);
  if (!rep.ok()) return {false, rep.failures.empty() ? "violations" : rep.failures.front()};
  if (rep.fuel_exhausted != 0) return {false, "machine programs did not reach Final"};

  ParseOptions fa;
  fa.calculus = Calculus::Fa;
  const FiniteLattice& L = two_point();
  TermPtr prog = parse_term(
      "(fn[bot](g: {top} ({bot} Top -> {bot} Top)) => g (fn[bot](d: {bot} Top) => d))"
      " (fn[top](y: {bot} Top) => y)",
      fa);
  bool statically_rejected = false;
  try {
    type_of_fa(L, Env{}, Qual::top(), prog);
  } catch (const TypeError& e) {
    statically_rejected = e.diag().code == diag_code::colour;
  }
  if (!statically_rejected) return {false, "async-under-sync not rejected with E-COLOUR"};
  std::vector<MachineConfig> trace;
  MachineRun run = machine_run(L, prog, 100, [&](const MachineConfig& c) { trace.push_back(c); });
  auto* st = std::get_if<Stuck>(&run.outcome);
  if (!st || st->kind != StuckKind::BarrierViolation)
    return {false, "expected a dynamic BarrierViolation"};
  if (trace.empty()) return {false, "no trace"};
  std::string last = print_machine_config(trace.back());
  if (last.find("|bot|") == std::string::npos || last.find("fn[top]") == std::string::npos)
    return {false, "violation not at the documented step: " + last};
  return {true, std::to_string(rep.checked) + " programs; negative stuck at step " +
                    std::to_string(run.steps)};
}

// 8. fc capture prediction over 300 generated programs, and the
//    fifty_fifty <: one_ring derivation reproduced in the trace.
static Outcome criterion8() {
  GenConfig cfg;
  cfg.count = 300;
  cfg.seed = 888;
  cfg.max_term_depth = 5;
  cfg.fuel = 500;
  SuiteReport rep = run_fc_soundness_suite(cfg);
  if (!rep.ok()) return {false, rep.failures.empty() ? "violations" : rep.failures.front()};

  TypePtr thunk = t_dep_arrow("u", qt(Qual::bot(), t_top()), qt(Qual::bot(), t_top()));
  Env env = Env{}
                .with_term_var("one_ring", qt(Qual::top(), thunk))
                .with_term_var("fifty_fifty", qt(Qual::var("one_ring"), thunk));
  SqDerivPtr d = subqual(env, Qual::var("fifty_fifty"), Qual::var("one_ring"));
  if (!d) return {false, "fifty_fifty <: one_ring not derivable"};
  std::string trace = print_subqual_deriv(d);
  const std::string expected =
      "sq-tvar: fifty_fifty <: one_ring\n"
      "  sq-refl-tvar: one_ring <: one_ring\n";
  if (trace != expected) return {false, "unexpected trace:\n" + trace};
  if (!replay_subqual(env, two_point(), d)) return {false, "derivation replay failed"};
  return {true, std::to_string(rep.checked) + " programs; trace reproduced"};
}

// 9. parse-print round trip on 1,000 generated ASTs, and byte-identical
//    output for repeated runs of the same seeded commands.
static Outcome criterion9() {
  int round_tripped = 0;
  for (Calculus calc : {Calculus::Fq, Calculus::Fm, Calculus::Fa, Calculus::Fc}) {
    Rng rng(909 + static_cast<int>(calc));
    ParseOptions opts;
    opts.calculus = calc;
    for (int i = 0; i < 250; ++i) {
      TermPtr t = gen_well_typed_term(rng, calc, two_point(), 4);
      TermPtr back;
      try {
        back = parse_term(print_term(t), opts);
      } catch (const TypeError& e) {
        return {false, std::string("reparse failed: ") + e.what() + " for: " + print_term(t)};
      }
      if (!alpha_eq_term(back, t)) return {false, "round trip not alpha-equal: " + print_term(t)};
      ++round_tripped;
    }
  }
  std::vector<std::vector<std::string>> cmds = {
      {"oracle", "--suite", "laws", "--count", "100", "--seed", "42"},
      {"oracle", "--suite", "progress", "--terms", "20", "--seed", "7"},
      {"sub", "--env", "A<:top,B<:top,X<:A,Y<:B", "X \\/ Y", "A \\/ B"},
  };
  for (const auto& cmd : cmds) {
    std::string a = run_cli_str(cmd);
    std::string b = run_cli_str(cmd);
    if (a != b) return {false, "non-deterministic output for " + cmd[0]};
  }
  return {true, std::to_string(round_tripped) + " ASTs round-tripped; reruns byte-identical"};
}

int main() {
  std::cout << "acceptance suite\n";
  criterion(1, "paper derivation reproduced via `sub`", 1.0, criterion1);
  criterion(2, "lattice laws over 1000 samples", 60.0, criterion2);
  criterion(3, "instantiation soundness per catalog base", 300.0, criterion3);
  criterion(4, "textual joins/meets equal table entries", 0.0, criterion4);
  criterion(5, "fq progress & preservation (500 programs)", 0.0, criterion5);
  criterion(6, "fm immutability safety (300 + 50 negatives)", 0.0, criterion6);
  criterion(7, "fa barrier safety (300 programs + negative)", 0.0, criterion7);
  criterion(8, "fc capture prediction (300 programs + trace)", 0.0, criterion8);
  criterion(9, "round-trip and deterministic output", 0.0, criterion9);
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
