#ifndef FQ_CLI_HPP
#define FQ_CLI_HPP

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fq/capture.hpp"
#include "fq/colours.hpp"
#include "fq/diag.hpp"
#include "fq/eval.hpp"
#include "fq/lattice_io.hpp"
#include "fq/oracle.hpp"
#include "fq/parser.hpp"
#include "fq/printer.hpp"
#include "fq/refs.hpp"
#include "fq/subqual.hpp"
#include "fq/typecheck.hpp"

namespace fq {

// Exit codes: 0 success, 1 diagnostics, 2 usage, 3 internal invariant breach.
inline constexpr int exit_ok = 0;
inline constexpr int exit_diag = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_internal = 3;

namespace cli_detail {

inline void print_diag(std::ostream& out, const Diagnostic& d, bool json) {
  if (json) {
    nlohmann::json j;
    j["diagnostics"] = nlohmann::json::array();
    nlohmann::json e;
    e["code"] = d.code;
    e["span"] = {{"line", d.span.line}, {"col", d.span.col}};
    e["message"] = d.message;
    j["diagnostics"].push_back(e);
    out << j.dump() << '\n';
    return;
  }
  out << d.code;
  if (d.span.line > 0) out << " at " << d.span.line << ':' << d.span.col;
  out << ": " << d.message << '\n';
  if (!d.trace.empty()) out << d.trace;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(diag_code::io, Span{}, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string sibling_path(const std::string& file, const std::string& rel) {
  if (!rel.empty() && rel.front() == '/') return rel;
  std::size_t slash = file.find_last_of('/');
  if (slash == std::string::npos) return rel;
  return file.substr(0, slash + 1) + rel;
}

struct LoadedSource {
  SourceFile src;
  FiniteLattice base = two_point();
  TermPtr term;
};

inline std::optional<Calculus> calculus_from_name(const std::string& name) {
  if (name == "fq") return Calculus::Fq;
  if (name == "fm") return Calculus::Fm;
  if (name == "fa") return Calculus::Fa;
  if (name == "fc") return Calculus::Fc;
  return std::nullopt;
}

inline LoadedSource load_source(const std::string& path, const std::string& calculus_override = "") {
  LoadedSource out;
  out.src = split_pragmas(read_file(path));
  if (!calculus_override.empty()) {
    auto c = calculus_from_name(calculus_override);
    if (!c) fail(diag_code::parse, Span{}, "unknown calculus '" + calculus_override + "'");
    out.src.calculus = *c;
  }
  if (!out.src.lattice_path.empty())
    out.base = load_lattice_file(sibling_path(path, out.src.lattice_path));
  ParseOptions opts;
  opts.calculus = out.src.calculus;
  opts.default_tag = out.src.default_tag;
  out.term = Parser(out.src.body, opts).parse_term_all();
  return out;
}

// Type checks under the given colour context (fa only consults it).
inline QualType check_term(const LoadedSource& ls, const QualPtr& colour_ctx) {
  static const StoreTyping empty_sigma;
  CheckContext ctx;
  ctx.calculus = ls.src.calculus;
  ctx.base = &ls.base;
  ctx.store_typing = &empty_sigma;
  TypeChecker tc(ctx);
  return tc.infer(Env{}, colour_ctx, ls.term);
}

inline Diagnostic stuck_diag(const Stuck& st) {
  const char* code = diag_code::stuck;
  switch (st.kind) {
    case StuckKind::AssertFailed:
    case StuckKind::UpqualFailed:
      code = diag_code::assert_failed;
      break;
    case StuckKind::SealedWrite:
      code = diag_code::sealed;
      break;
    case StuckKind::BarrierViolation:
      code = diag_code::barrier;
      break;
    default:
      break;
  }
  return Diagnostic{"error", Span{}, code,
                    std::string(stuck_kind_name(st.kind)) + ": " + st.detail, ""};
}

inline nlohmann::json report_json(const SuiteReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["seed"] = r.seed;
  j["checked"] = r.checked;
  j["violations"] = r.violations;
  j["warnings"] = r.warnings;
  j["fuel_exhausted"] = r.fuel_exhausted;
  j["failures"] = r.failures;
  return j;
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;

  CLI::App app{"fq: the qualified polymorphic lambda calculus toolkit"};
  app.require_subcommand(1);

  // check
  std::string check_file, check_calculus, check_colour;
  bool check_json = false;
  CLI::App* cmd_check = app.add_subcommand("check", "parse and type check a source file");
  cmd_check->add_option("file", check_file, "source file")->required();
  cmd_check->add_option("--calculus", check_calculus, "override the file's calculus pragma");
  cmd_check->add_option("--colour-context", check_colour, "top-level colour context R (fa)");
  cmd_check->add_flag("--json", check_json, "machine-readable diagnostics");

  // eval
  std::string eval_file, eval_calculus, eval_colour;
  int eval_fuel_n = 10000;
  bool eval_trace = false, eval_nocheck = false, eval_json = false;
  CLI::App* cmd_eval = app.add_subcommand("eval", "run a source file");
  cmd_eval->add_option("file", eval_file, "source file")->required();
  cmd_eval->add_option("--calculus", eval_calculus, "override the file's calculus pragma");
  cmd_eval->add_option("--colour-context", eval_colour, "top-level colour context R (fa)");
  cmd_eval->add_option("--fuel", eval_fuel_n, "maximum number of steps");
  cmd_eval->add_flag("--trace", eval_trace, "print every step");
  cmd_eval->add_flag("--no-check", eval_nocheck, "skip the type checker");
  cmd_eval->add_flag("--json", eval_json, "machine-readable diagnostics");

  // sub
  std::string sub_env, sub_lhs, sub_rhs, sub_lattice, sub_calculus = "fq";
  bool sub_json = false;
  CLI::App* cmd_sub = app.add_subcommand("sub", "subqualification query");
  cmd_sub->add_option("lhs", sub_lhs, "left qualifier")->required();
  cmd_sub->add_option("rhs", sub_rhs, "right qualifier")->required();
  cmd_sub->add_option("--env", sub_env, "comma-separated bindings, e.g. A<:top,X<:A");
  cmd_sub->add_option("--lattice", sub_lattice, "base lattice definition file");
  cmd_sub->add_option("--calculus", sub_calculus, "fq|fm|fa|fc (affects parsing of bindings)");
  cmd_sub->add_flag("--json", sub_json, "machine-readable diagnostics");

  // subtype
  std::string st_env, st_lhs, st_rhs, st_lattice, st_calculus = "fq";
  CLI::App* cmd_subtype = app.add_subcommand("subtype", "subtyping query");
  cmd_subtype->add_option("lhs", st_lhs, "left qualified type")->required();
  cmd_subtype->add_option("rhs", st_rhs, "right qualified type")->required();
  cmd_subtype->add_option("--env", st_env, "comma-separated bindings");
  cmd_subtype->add_option("--lattice", st_lattice, "base lattice definition file");
  cmd_subtype->add_option("--calculus", st_calculus, "fq|fm|fa|fc");

  // oracle
  std::string or_suite = "all", or_lattices, or_corpus;
  std::uint64_t or_seed = 42;
  int or_depth = 4, or_count = 200, or_terms = 50, or_fuel = 500, or_term_depth = 4;
  bool or_json = false;
  CLI::App* cmd_oracle = app.add_subcommand("oracle", "run the brute-force oracle suites");
  cmd_oracle->add_option("--suite", or_suite, "all|laws|agreement|textual|progress");
  cmd_oracle->add_option("--lattices", or_lattices, "comma-separated catalog names for agreement");
  cmd_oracle->add_option("--depth", or_depth, "max formula depth");
  cmd_oracle->add_option("--seed", or_seed, "random seed");
  cmd_oracle->add_option("--count", or_count, "samples per formula suite");
  cmd_oracle->add_option("--terms", or_terms, "programs per calculus");
  cmd_oracle->add_option("--fuel", or_fuel, "evaluation fuel");
  cmd_oracle->add_option("--term-depth", or_term_depth, "max term depth");
  cmd_oracle->add_option("--corpus", or_corpus, "persist heuristic-completeness misses to this file");
  cmd_oracle->add_flag("--json", or_json, "JSON report");

  // lattice validate
  std::string lat_file;
  CLI::App* cmd_lattice = app.add_subcommand("lattice", "lattice utilities");
  cmd_lattice->require_subcommand(1);
  CLI::App* cmd_lat_validate = cmd_lattice->add_subcommand("validate", "validate a definition file");
  cmd_lat_validate->add_option("file", lat_file, "lattice definition file")->required();

  std::vector<std::string> argv = args;
  try {
    std::vector<const char*> cargv;
    cargv.push_back("fq");
    for (const auto& a : argv) cargv.push_back(a.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return exit_usage;
  }

  bool json_mode = check_json || eval_json || sub_json;

  auto colour_of = [](const std::string& text, const LoadedSource& ls) {
    if (text.empty()) return Qual::top();
    ParseOptions opts;
    opts.calculus = ls.src.calculus;
    return Parser(text, opts).parse_qual_all();
  };

  try {
    if (*cmd_check) {
      LoadedSource ls = load_source(check_file, check_calculus);
      out << print_qualtype(check_term(ls, colour_of(check_colour, ls))) << '\n';
      return exit_ok;
    }

    if (*cmd_eval) {
      LoadedSource ls = load_source(eval_file, eval_calculus);
      if (!eval_nocheck) check_term(ls, colour_of(eval_colour, ls));
      if (ls.src.calculus == Calculus::Fa) {
        MachineRun run = machine_run(ls.base, ls.term, eval_fuel_n, [&](const MachineConfig& cfg) {
          if (eval_trace) out << print_machine_config(cfg) << '\n';
        });
        if (auto* fin = std::get_if<MachineFinal>(&run.outcome)) {
          out << print_term(fin->value) << '\n';
          return exit_ok;
        }
        if (auto* st = std::get_if<Stuck>(&run.outcome)) {
          print_diag(out, stuck_diag(*st), eval_json);
          return exit_diag;
        }
        print_diag(out, Diagnostic{"error", Span{}, diag_code::fuel, "out of fuel", ""}, eval_json);
        return exit_diag;
      }
      Store store;
      Store* store_ptr = ls.src.calculus == Calculus::Fm ? &store : nullptr;
      Evaluator ev(ls.base, store_ptr);
      TermPtr t = ls.term;
      int steps = 0;
      for (; steps < eval_fuel_n; ++steps) {
        if (eval_trace) out << print_term(t) << '\n';
        StepResult r = ev.step(t);
        if (std::get_if<IsValue>(&r)) break;
        if (auto* st = std::get_if<Stuck>(&r)) {
          print_diag(out, stuck_diag(*st), eval_json);
          return exit_diag;
        }
        t = std::get<Stepped>(r).term;
      }
      if (!is_value(t)) {
        print_diag(out, Diagnostic{"error", Span{}, diag_code::fuel, "out of fuel", ""}, eval_json);
        return exit_diag;
      }
      out << print_term(t) << '\n';
      if (ls.src.calculus == Calculus::Fm) {
        out << "store:\n" << print_store(store);
      }
      return exit_ok;
    }

    if (*cmd_sub || *cmd_subtype) {
      bool is_sub = static_cast<bool>(*cmd_sub);
      std::string calc_name = is_sub ? sub_calculus : st_calculus;
      ParseOptions opts;
      if (calc_name == "fq") opts.calculus = Calculus::Fq;
      else if (calc_name == "fm") opts.calculus = Calculus::Fm;
      else if (calc_name == "fa") opts.calculus = Calculus::Fa;
      else if (calc_name == "fc") opts.calculus = Calculus::Fc;
      else {
        err << "unknown calculus: " << calc_name << '\n';
        return exit_usage;
      }
      std::string lattice_file = is_sub ? sub_lattice : st_lattice;
      FiniteLattice base = lattice_file.empty() ? two_point() : load_lattice_file(lattice_file);
      Env env = parse_env_string(is_sub ? sub_env : st_env, opts);
      if (!wf_env(env, base)) {
        print_diag(out, Diagnostic{"error", Span{}, diag_code::wf, "ill-formed environment", ""},
                   json_mode);
        return exit_diag;
      }
      if (is_sub) {
        QualPtr lhs = Parser(sub_lhs, opts).parse_qual_all();
        QualPtr rhs = Parser(sub_rhs, opts).parse_qual_all();
        SqDerivPtr d = subqual(env, base, lhs, rhs);
        if (d) {
          if (!replay_subqual(env, base, d)) {
            err << "internal: derivation replay failed\n";
            return exit_internal;
          }
          out << print_subqual_deriv(d);
          return exit_ok;
        }
        out << "not derivable: " << print_qual(lhs) << " <: " << print_qual(rhs) << '\n';
        auto ce = oracle_leq(env, base, lhs, rhs, extension_lattices(base));
        if (ce) {
          out << "counterexample in " << ce->lattice << ":";
          for (const auto& [v, e] : ce->assignment) out << ' ' << v << ":=" << e;
          out << '\n';
        } else {
          out << "no counterexample found in the catalog (heuristic search)\n";
        }
        return exit_diag;
      }
      QualType lhs = Parser(st_lhs, opts).parse_qualtype_all();
      QualType rhs = Parser(st_rhs, opts).parse_qualtype_all();
      if (!wf_qualtype(env, base, lhs) || !wf_qualtype(env, base, rhs)) {
        print_diag(out, Diagnostic{"error", Span{}, diag_code::wf, "ill-formed type", ""}, json_mode);
        return exit_diag;
      }
      StDerivPtr d = subtype(env, base, lhs, rhs);
      if (d) {
        print_subtype_deriv(out, d);
        return exit_ok;
      }
      out << "not derivable: " << print_qualtype(lhs) << " <: " << print_qualtype(rhs) << '\n';
      return exit_diag;
    }

    if (*cmd_oracle) {
      std::vector<SuiteReport> reports;
      GenConfig cfg;
      cfg.seed = or_seed;
      cfg.count = or_count;
      cfg.max_formula_depth = or_depth;
      cfg.max_term_depth = or_term_depth;
      cfg.fuel = or_fuel;

      auto want = [&](const std::string& s) { return or_suite == "all" || or_suite == s; };
      if (want("laws")) reports.push_back(run_lattice_laws_suite(cfg));
      if (want("textual")) reports.push_back(run_textual_join_meet_suite());
      if (want("agreement")) {
        GenConfig acfg = cfg;
        acfg.use_consts = true;
        acfg.n_qual_vars = 2;
        acfg.max_formula_depth = std::min(acfg.max_formula_depth, 3);
        reports.push_back(run_soundness_agreement_suite(cfg, two_point()));
        for (const FiniteLattice& L : catalog_small_lattices()) {
          if (!or_lattices.empty() && or_lattices.find(L.name()) == std::string::npos) continue;
          reports.push_back(run_soundness_agreement_suite(acfg, L));
        }
      }
      if (want("progress")) {
        GenConfig pcfg = cfg;
        pcfg.count = or_terms;
        reports.push_back(run_fq_soundness_suite(pcfg));
        reports.push_back(run_fm_soundness_suite(pcfg));
        reports.push_back(run_fa_soundness_suite(pcfg));
        reports.push_back(run_fc_soundness_suite(pcfg));
      }

      int violations = 0, warnings = 0;
      std::vector<std::string> misses;
      for (const SuiteReport& r : reports) {
        violations += r.violations;
        warnings += r.warnings;
        misses.insert(misses.end(), r.miss_corpus.begin(), r.miss_corpus.end());
      }
      if (!or_corpus.empty() && !misses.empty()) {
        std::ofstream corpus(or_corpus);
        for (const auto& m : misses) corpus << m << '\n';
      }
      if (or_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const SuiteReport& r : reports) j.push_back(report_json(r));
        out << j.dump(2) << '\n';
      } else {
        for (const SuiteReport& r : reports) out << r.text();
        out << "total: " << violations << " violations, " << warnings << " warnings";
        if (!or_corpus.empty() && !misses.empty())
          out << " (" << misses.size() << " misses persisted to " << or_corpus << ")";
        out << '\n';
      }
      return violations == 0 ? exit_ok : exit_diag;
    }

    if (*cmd_lattice) {
      FiniteLattice L = load_lattice_file(lat_file);
      out << "lattice " << L.name() << ": " << L.size() << " elements, bot=" << L.bottom_label()
          << ", top=" << L.top_label() << '\n';
      return exit_ok;
    }
  } catch (const TypeError& e) {
    print_diag(out, e.diag(), json_mode);
    return exit_diag;
  } catch (const LatticeError& e) {
    print_diag(out, Diagnostic{"error", Span{}, diag_code::lattice, e.what(), ""}, json_mode);
    return exit_diag;
  } catch (const GenerationExhausted& e) {
    err << "internal: " << e.what() << '\n';
    return exit_internal;
  } catch (const std::invalid_argument& e) {
    print_diag(out, Diagnostic{"error", Span{}, diag_code::wf, e.what(), ""}, json_mode);
    return exit_diag;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return exit_internal;
  }
  return exit_usage;
}

}  // namespace fq

#endif  // FQ_CLI_HPP
