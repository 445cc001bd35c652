#ifndef FQ_COLOURS_HPP
#define FQ_COLOURS_HPP

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fq/ast.hpp"
#include "fq/eval.hpp"
#include "fq/typecheck.hpp"

namespace fq {

// ---------------------------------------------------------------------------
// CK machine for the colouring calculus.  Function calls install a barrier
// frame carrying the evaluated colour of the callee; a call is admissible
// only when its colour is below every barrier on the stack.

struct FrAppFn {
  TermPtr pending_arg;
};
struct FrAppArg {
  TermPtr fn_value;
};
struct FrTApp {
  TypePtr arg;
};
struct FrQApp {
  QualPtr arg;
};
struct FrUpqual {
  QualPtr qual;
};
struct FrAssert {
  QualPtr qual;
};
struct FrBarrier {
  std::string colour;  // ground element label
};

using Frame = std::variant<FrAppFn, FrAppArg, FrTApp, FrQApp, FrUpqual, FrAssert, FrBarrier>;

struct MachineConfig {
  TermPtr control;
  std::vector<Frame> stack;  // back() is the innermost frame
};

inline bool barrier_compatible(const FiniteLattice& L, const std::vector<Frame>& stack, int colour) {
  for (const Frame& f : stack)
    if (auto* b = std::get_if<FrBarrier>(&f))
      if (!L.leq(colour, L.index_of(b->colour))) return false;
  return true;
}

inline std::string print_frame(const Frame& f) {
  if (auto* a = std::get_if<FrAppFn>(&f)) return "_ " + print_term(a->pending_arg);
  if (auto* a = std::get_if<FrAppArg>(&f)) return print_term(a->fn_value) + " _";
  if (auto* a = std::get_if<FrTApp>(&f)) return "_ [" + print_type(a->arg) + "]";
  if (auto* a = std::get_if<FrQApp>(&f)) return "_ [{" + print_qual(a->arg) + "}]";
  if (auto* a = std::get_if<FrUpqual>(&f)) return "upqual " + print_qual_atom(a->qual) + " _";
  if (auto* a = std::get_if<FrAssert>(&f)) return "assert " + print_qual_atom(a->qual) + " _";
  if (auto* b = std::get_if<FrBarrier>(&f)) return "|" + b->colour + "|";
  return "?";
}

inline std::string print_machine_config(const MachineConfig& cfg) {
  std::ostringstream os;
  os << '<' << print_term(cfg.control) << " || ";
  for (auto it = cfg.stack.rbegin(); it != cfg.stack.rend(); ++it) {
    if (it != cfg.stack.rbegin()) os << " :: ";
    os << print_frame(*it);
  }
  os << '>';
  return os.str();
}

struct MachineFinal {
  TermPtr value;
};
using MachineResult = std::variant<MachineConfig, MachineFinal, Stuck>;

inline MachineResult machine_step(const FiniteLattice& L, const MachineConfig& cfg) {
  const TermPtr& c = cfg.control;

  if (!is_value(c)) {
    if (term_as<EVar>(c)) return Stuck{StuckKind::OpenTerm, print_term(c)};
    if (auto* ap = term_as<EApp>(c)) {
      MachineConfig next{ap->fn, cfg.stack};
      next.stack.push_back(FrAppFn{ap->arg});
      return next;
    }
    if (auto* tp = term_as<ETApp>(c)) {
      MachineConfig next{tp->fn, cfg.stack};
      next.stack.push_back(FrTApp{tp->arg});
      return next;
    }
    if (auto* qp = term_as<EQApp>(c)) {
      MachineConfig next{qp->fn, cfg.stack};
      next.stack.push_back(FrQApp{qp->arg});
      return next;
    }
    if (auto* up = term_as<EUpqual>(c)) {
      MachineConfig next{up->body, cfg.stack};
      next.stack.push_back(FrUpqual{up->qual});
      return next;
    }
    if (auto* as = term_as<EAssert>(c)) {
      MachineConfig next{as->body, cfg.stack};
      next.stack.push_back(FrAssert{as->qual});
      return next;
    }
    return Stuck{StuckKind::IllFormed, "form not supported by the machine: " + print_term(c)};
  }

  if (cfg.stack.empty()) return MachineFinal{c};

  MachineConfig next{c, cfg.stack};
  Frame top = next.stack.back();
  next.stack.pop_back();

  if (std::get_if<FrBarrier>(&top)) return next;  // value returns past the barrier

  if (auto* fa = std::get_if<FrAppFn>(&top)) {
    next.stack.push_back(FrAppArg{c});
    next.control = fa->pending_arg;
    return next;
  }

  // The remaining frames apply or check the returned value.  Calls evaluate
  // the callee's colour and must respect every barrier below.
  auto call = [&](const QualPtr& tag, const TermPtr& reduct) -> MachineResult {
    auto colour = eval_ground(L, tag);
    if (!colour) return Stuck{StuckKind::NonGroundTag, print_qual(tag)};
    if (!barrier_compatible(L, next.stack, *colour))
      return Stuck{StuckKind::BarrierViolation,
                   "colour " + L.label_of(*colour) + " under an incompatible barrier"};
    next.stack.push_back(FrBarrier{L.label_of(*colour)});
    next.control = reduct;
    return next;
  };

  if (auto* aa = std::get_if<FrAppArg>(&top)) {
    auto* fn = term_as<EAbs>(aa->fn_value);
    if (!fn) return Stuck{StuckKind::AppNonFunction, print_term(aa->fn_value)};
    return call(fn->tag, subst_term(fn->body, fn->param, c));
  }
  if (auto* ta = std::get_if<FrTApp>(&top)) {
    auto* fn = term_as<ETAbs>(c);
    if (!fn) return Stuck{StuckKind::AppNonFunction, print_term(c)};
    return call(fn->tag, subst_type_in_term(fn->body, fn->var, ta->arg));
  }
  if (auto* qa = std::get_if<FrQApp>(&top)) {
    auto* fn = term_as<EQAbs>(c);
    if (!fn) return Stuck{StuckKind::AppNonFunction, print_term(c)};
    return call(fn->tag, subst_qual_in_term(fn->body, fn->var, qa->arg));
  }
  if (auto* uq = std::get_if<FrUpqual>(&top)) {
    auto tv = eval_ground(L, tag_of_value(c)), qv = eval_ground(L, uq->qual);
    if (!tv || !qv) return Stuck{StuckKind::NonGroundTag, print_term(c)};
    if (!L.leq(*tv, *qv))
      return Stuck{StuckKind::UpqualFailed,
                   "cannot upqual " + L.label_of(*tv) + " to " + L.label_of(*qv)};
    next.control = retag_value(c, uq->qual);
    return next;
  }
  if (auto* af = std::get_if<FrAssert>(&top)) {
    auto tv = eval_ground(L, tag_of_value(c)), qv = eval_ground(L, af->qual);
    if (!tv || !qv) return Stuck{StuckKind::NonGroundTag, print_term(c)};
    if (!L.leq(*tv, *qv))
      return Stuck{StuckKind::AssertFailed,
                   "tag " + L.label_of(*tv) + " is not below " + L.label_of(*qv)};
    next.control = c;
    return next;
  }
  return Stuck{StuckKind::IllFormed, "unknown frame"};
}

struct MachineRun {
  std::variant<MachineFinal, Stuck, OutOfFuel> outcome{OutOfFuel{}};
  int steps = 0;
};

inline MachineRun machine_run(const FiniteLattice& L, TermPtr program, int fuel,
                              const std::function<void(const MachineConfig&)>& on_step = {}) {
  MachineConfig cfg{std::move(program), {}};
  MachineRun run;
  for (int i = 0; i < fuel; ++i) {
    if (on_step) on_step(cfg);
    MachineResult r = machine_step(L, cfg);
    run.steps = i + 1;
    if (auto* nxt = std::get_if<MachineConfig>(&r)) {
      cfg = std::move(*nxt);
      continue;
    }
    if (auto* fin = std::get_if<MachineFinal>(&r)) {
      run.outcome = *fin;
      return run;
    }
    run.outcome = std::get<Stuck>(r);
    return run;
  }
  run.outcome = OutOfFuel{cfg.control};
  return run;
}

// ---------------------------------------------------------------------------
// Colour-context typing (fa).

inline QualType type_of_fa(const FiniteLattice& L, const Env& env, const QualPtr& colour_ctx,
                           const TermPtr& t) {
  CheckContext ctx;
  ctx.calculus = Calculus::Fa;
  ctx.base = &L;
  TypeChecker tc(ctx);
  return tc.infer(env, colour_ctx, t);
}

// Machine-configuration typing, used by the preservation suite.  The control
// is typed under the meet of all barrier colours; each frame then transforms
// the type of the value that will return into it, checking the call colour
// against the barriers below that frame.
inline std::optional<QualType> type_of_config(const FiniteLattice& L, const MachineConfig& cfg) {
  auto barrier_meet = [&](std::size_t upto) {
    int m = L.top_index();
    for (std::size_t i = 0; i < upto; ++i)
      if (auto* b = std::get_if<FrBarrier>(&cfg.stack[i])) m = L.meet(m, L.index_of(b->colour));
    return canonical_const(L, m);
  };
  Env env;
  try {
    QualType cur = type_of_fa(L, env, barrier_meet(cfg.stack.size()), cfg.control);
    for (std::size_t i = cfg.stack.size(); i-- > 0;) {
      const Frame& f = cfg.stack[i];
      QualPtr below = barrier_meet(i);
      if (std::get_if<FrBarrier>(&f)) continue;
      if (auto* fa = std::get_if<FrAppFn>(&f)) {
        auto* arrow = type_as<TArrow>(cur.shape);
        if (!arrow) return std::nullopt;
        if (!subqual_holds(env, L, cur.qual, below)) return std::nullopt;
        QualType arg = type_of_fa(L, env, below, fa->pending_arg);
        if (!subtype_holds(env, L, arg, arrow->param)) return std::nullopt;
        cur = arrow->result;
      } else if (auto* aa = std::get_if<FrAppArg>(&f)) {
        QualType fn = type_of_fa(L, env, below, aa->fn_value);
        auto* arrow = type_as<TArrow>(fn.shape);
        if (!arrow) return std::nullopt;
        if (!subqual_holds(env, L, fn.qual, below)) return std::nullopt;
        if (!subtype_holds(env, L, cur, arrow->param)) return std::nullopt;
        cur = arrow->result;
      } else if (auto* ta = std::get_if<FrTApp>(&f)) {
        auto* all = type_as<TAll>(cur.shape);
        if (!all) return std::nullopt;
        if (!subqual_holds(env, L, cur.qual, below)) return std::nullopt;
        if (!subtype_simple(env, L, ta->arg, all->bound)) return std::nullopt;
        cur = subst_type_in_qualtype(all->body, all->var, ta->arg);
      } else if (auto* qa = std::get_if<FrQApp>(&f)) {
        auto* all = type_as<TQAll>(cur.shape);
        if (!all) return std::nullopt;
        if (!subqual_holds(env, L, cur.qual, below)) return std::nullopt;
        if (!subqual_holds(env, L, qa->arg, all->bound)) return std::nullopt;
        cur = subst_qual_in_qualtype(all->body, all->var, qa->arg);
      } else if (auto* uq = std::get_if<FrUpqual>(&f)) {
        if (!subqual_holds(env, L, cur.qual, uq->qual)) return std::nullopt;
        cur = qt(uq->qual, cur.shape);
      } else if (auto* af = std::get_if<FrAssert>(&f)) {
        if (!subqual_holds(env, L, cur.qual, af->qual)) return std::nullopt;
      }
    }
    return cur;
  } catch (const TypeError&) {
    return std::nullopt;
  }
}

}  // namespace fq

#endif  // FQ_COLOURS_HPP
