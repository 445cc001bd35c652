#ifndef FQ_TYPECHECK_HPP
#define FQ_TYPECHECK_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fq/ast.hpp"
#include "fq/diag.hpp"
#include "fq/lattice.hpp"
#include "fq/printer.hpp"
#include "fq/subqual.hpp"

namespace fq {

// ---------------------------------------------------------------------------
// Well-formedness.

bool wf_simple(const Env& env, const FiniteLattice& L, const TypePtr& t);

inline bool wf_qualtype(const Env& env, const FiniteLattice& L, const QualType& t) {
  return well_formed_qual(env, L, t.qual) && wf_simple(env, L, t.shape);
}

inline bool wf_simple(const Env& env, const FiniteLattice& L, const TypePtr& t) {
  if (type_as<TTop>(t) || type_as<TUnit>(t)) return true;
  if (auto* v = type_as<TVar>(t)) return env.lookup_type(v->name) != nullptr;
  if (auto* a = type_as<TArrow>(t))
    return wf_qualtype(env, L, a->param) && wf_qualtype(env, L, a->result);
  if (auto* al = type_as<TAll>(t))
    return wf_simple(env, L, al->bound) &&
           wf_qualtype(env.with_type_var(al->var, al->bound), L, al->body);
  if (auto* qa = type_as<TQAll>(t))
    return well_formed_qual(env, L, qa->bound) &&
           wf_qualtype(env.with_qual_var(qa->var, qa->bound), L, qa->body);
  if (auto* bx = type_as<TBox>(t)) return wf_qualtype(env, L, bx->content);
  if (auto* d = type_as<TDepArrow>(t))
    return wf_qualtype(env, L, d->param) &&
           wf_qualtype(env.with_term_var(d->var, d->param), L, d->result);
  return false;
}

inline bool wf_env(const Env& env, const FiniteLattice& L) {
  if (!env_well_formed_quals(env, L)) return false;
  Env prefix;
  for (const Binding& b : env.entries()) {
    switch (b.kind) {
      case BindKind::QualVar:
        prefix = prefix.with_qual_var(b.name, b.qual_bound);
        break;
      case BindKind::TypeVar:
        if (!wf_simple(prefix, L, b.type_bound)) return false;
        prefix = prefix.with_type_var(b.name, b.type_bound);
        break;
      case BindKind::TermVar:
        if (!wf_qualtype(prefix, L, b.term_type)) return false;
        prefix = prefix.with_term_var(b.name, b.term_type);
        break;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Subtyping, with derivation trees for traces.

struct SubtypeDeriv;
using StDerivPtr = std::shared_ptr<const SubtypeDeriv>;

struct SubtypeDeriv {
  std::string rule;
  std::string conclusion;  // printed form
  std::vector<StDerivPtr> premises;
  SqDerivPtr sq;  // qualifier premise of sub-qtype
};

inline StDerivPtr st_node(std::string rule, std::string conclusion, std::vector<StDerivPtr> prem = {},
                          SqDerivPtr sq = nullptr) {
  return std::make_shared<SubtypeDeriv>(
      SubtypeDeriv{std::move(rule), std::move(conclusion), std::move(prem), std::move(sq)});
}

inline void print_subtype_deriv(std::ostream& os, const StDerivPtr& d, int indent = 0) {
  os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << d->rule << ": " << d->conclusion << '\n';
  if (d->sq) print_subqual_deriv(os, d->sq, indent + 1);
  for (const auto& p : d->premises) print_subtype_deriv(os, p, indent + 1);
}

StDerivPtr subtype(const Env& env, const FiniteLattice& L, const QualType& a, const QualType& b);

// Kernel-style F-sub subtyping on shapes: quantifier bounds must match up to
// alpha, bodies are covariant.
inline StDerivPtr subtype_simple(const Env& env, const FiniteLattice& L, const TypePtr& a,
                                 const TypePtr& b) {
  auto conc = [&] { return print_type(a) + " <: " + print_type(b); };
  if (type_as<TTop>(b)) return st_node("sub-top", conc());
  if (auto* av = type_as<TVar>(a)) {
    if (auto* bv = type_as<TVar>(b); bv && av->name == bv->name)
      return st_node("sub-refl-tvar", conc());
    const Binding* bind = env.lookup_type(av->name);
    if (bind) {
      if (StDerivPtr d = subtype_simple(env, L, bind->type_bound, b))
        return st_node("sub-tvar", conc(), {d});
    }
    return nullptr;
  }
  if (type_as<TUnit>(a) && type_as<TUnit>(b)) return st_node("sub-unit", conc());
  if (auto* aa = type_as<TArrow>(a)) {
    auto* ba = type_as<TArrow>(b);
    if (!ba) return nullptr;
    StDerivPtr p = subtype(env, L, ba->param, aa->param);
    if (!p) return nullptr;
    StDerivPtr r = subtype(env, L, aa->result, ba->result);
    if (!r) return nullptr;
    return st_node("sub-arrow", conc(), {p, r});
  }
  if (auto* al = type_as<TAll>(a)) {
    auto* bl = type_as<TAll>(b);
    if (!bl || !alpha_eq_type(al->bound, bl->bound)) return nullptr;
    Env inner = env.with_type_var(al->var, al->bound);
    QualType bbody = bl->body;
    if (bl->var != al->var) bbody = subst_type_in_qualtype(bbody, bl->var, t_var(al->var));
    StDerivPtr d = subtype(inner, L, al->body, bbody);
    if (!d) return nullptr;
    return st_node("sub-all", conc(), {d});
  }
  if (auto* aq = type_as<TQAll>(a)) {
    auto* bq = type_as<TQAll>(b);
    if (!bq || !qual_eq(aq->bound, bq->bound)) return nullptr;
    Env inner = env.with_qual_var(aq->var, aq->bound);
    QualType bbody = bq->body;
    if (bq->var != aq->var) bbody = subst_qual_in_qualtype(bbody, bq->var, Qual::var(aq->var));
    StDerivPtr d = subtype(inner, L, aq->body, bbody);
    if (!d) return nullptr;
    return st_node("sub-qall", conc(), {d});
  }
  if (auto* ab = type_as<TBox>(a)) {
    auto* bb = type_as<TBox>(b);
    if (!bb) return nullptr;
    StDerivPtr f = subtype(env, L, ab->content, bb->content);
    if (!f) return nullptr;
    StDerivPtr g = subtype(env, L, bb->content, ab->content);
    if (!g) return nullptr;
    return st_node("sub-box", conc(), {f, g});
  }
  if (auto* ad = type_as<TDepArrow>(a)) {
    auto* bd = type_as<TDepArrow>(b);
    if (!bd || !qual_eq(ad->param.qual, bd->param.qual)) return nullptr;
    StDerivPtr p = subtype_simple(env, L, bd->param.shape, ad->param.shape);
    if (!p) return nullptr;
    Env inner = env.with_term_var(ad->var, ad->param);
    QualType bres = bd->result;
    if (bd->var != ad->var) bres = subst_qual_in_qualtype(bres, bd->var, Qual::var(ad->var));
    StDerivPtr r = subtype(inner, L, ad->result, bres);
    if (!r) return nullptr;
    return st_node("c-sub-arrow", conc(), {p, r});
  }
  return nullptr;
}

inline StDerivPtr subtype(const Env& env, const FiniteLattice& L, const QualType& a, const QualType& b) {
  SqDerivPtr sq = subqual(env, L, a.qual, b.qual);
  if (!sq) return nullptr;
  StDerivPtr sh = subtype_simple(env, L, a.shape, b.shape);
  if (!sh) return nullptr;
  return st_node("sub-qtype", print_qualtype(a) + " <: " + print_qualtype(b), {sh}, sq);
}

inline bool subtype_holds(const Env& env, const FiniteLattice& L, const QualType& a, const QualType& b) {
  return subtype(env, L, a, b) != nullptr;
}

// ---------------------------------------------------------------------------
// Algorithmic typing.  Minimal-type synthesis with subsumption folded into
// the elimination forms.  One checker covers all four calculi; the calculus
// selects which term forms are admitted, fa threads the colour context, and
// fm consults the store typing for locations.

struct CheckContext {
  Calculus calculus = Calculus::Fq;
  const FiniteLattice* base = &two_point();
  const std::map<int, QualType>* store_typing = nullptr;  // fm: location content types
  // When set, records the content type the derivation assigns to each ref
  // node; the preservation suite extends the store typing with exactly these
  // on allocation.
  std::map<const Term*, QualType>* ref_types = nullptr;
};

class TypeChecker {
 public:
  explicit TypeChecker(CheckContext ctx) : ctx_(ctx) {}

  QualType infer(const Env& env, const TermPtr& t) { return infer(env, Qual::top(), t); }

  QualType infer(const Env& env, const QualPtr& colour_ctx, const TermPtr& t) {
    const FiniteLattice& L = *ctx_.base;
    const Span& sp = t->span;

    if (auto* v = term_as<EVar>(t)) {
      const Binding* b = env.lookup_term(v->name);
      if (!b) fail(diag_code::unbound, sp, "unbound variable '" + v->name + "'");
      if (ctx_.calculus == Calculus::Fc) return qt(Qual::var(v->name), b->term_type.shape);
      return b->term_type;
    }

    if (auto* u = term_as<EUnitV>(t)) {
      require_calculus(Calculus::Fm, sp, "unit");
      require_wf_qual(env, u->tag, sp);
      return qt(u->tag, t_unit());
    }

    if (auto* ab = term_as<EAbs>(t)) {
      if (ctx_.calculus == Calculus::Fc)
        fail(diag_code::type, sp, "plain abstraction is not a form of fc; use fn[P](x <: Q : S)");
      require_wf_qual(env, ab->tag, sp);
      require_wf_qualtype(env, ab->param_type, sp);
      Env inner = env.with_term_var(ab->param, ab->param_type);
      QualType body = infer(inner, body_colour(ab->tag, colour_ctx), ab->body);
      return qt(ab->tag, t_arrow(ab->param_type, body));
    }

    if (auto* ca = term_as<ECAbs>(t)) {
      require_calculus(Calculus::Fc, sp, "capture abstraction");
      require_wf_qual(env, ca->tag, sp);
      require_wf_qualtype(env, ca->param_type, sp);
      capture_check(env, t, ca->tag, sp);
      Env inner = env.with_term_var(ca->param, ca->param_type);
      QualType body = infer(inner, body_colour(ca->tag, colour_ctx), ca->body);
      return qt(ca->tag, t_dep_arrow(ca->param, ca->param_type, body));
    }

    if (auto* ta = term_as<ETAbs>(t)) {
      require_wf_qual(env, ta->tag, sp);
      if (!wf_simple(env, L, ta->bound)) fail(diag_code::wf, sp, "ill-formed type bound");
      if (ctx_.calculus == Calculus::Fc) capture_check(env, t, ta->tag, sp);
      Env inner = env.with_type_var(ta->var, ta->bound);
      QualType body = infer(inner, body_colour(ta->tag, colour_ctx), ta->body);
      return qt(ta->tag, t_all(ta->var, ta->bound, body));
    }

    if (auto* qa = term_as<EQAbs>(t)) {
      require_wf_qual(env, qa->tag, sp);
      require_wf_qual(env, qa->bound, sp);
      if (ctx_.calculus == Calculus::Fc) capture_check(env, t, qa->tag, sp);
      Env inner = env.with_qual_var(qa->var, qa->bound);
      QualType body = infer(inner, body_colour(qa->tag, colour_ctx), qa->body);
      return qt(qa->tag, t_qall(qa->var, qa->bound, body));
    }

    if (auto* ap = term_as<EApp>(t)) {
      if (ctx_.calculus == Calculus::Fc)
        fail(diag_code::type, sp, "fc application takes a qualifier argument: s [{Q}] t");
      QualType fn = infer(env, colour_ctx, ap->fn);
      auto* arrow = type_as<TArrow>(fn.shape);
      if (!arrow)
        fail(diag_code::type, sp, "application of a non-function: " + print_qualtype(fn));
      colour_check(env, fn.qual, colour_ctx, sp);
      check_argument(env, colour_ctx, ap->arg, arrow->param, sp);
      return arrow->result;
    }

    if (auto* cp = term_as<ECApp>(t)) {
      require_calculus(Calculus::Fc, sp, "capture application");
      QualType fn = infer(env, colour_ctx, cp->fn);
      auto* dep = type_as<TDepArrow>(fn.shape);
      if (!dep)
        fail(diag_code::type, sp, "application of a non-function: " + print_qualtype(fn));
      require_wf_qual(env, cp->qual_arg, sp);
      if (!subqual(env, L, cp->qual_arg, dep->param.qual))
        fail(diag_code::bound, sp,
             "qualifier argument " + print_qual(cp->qual_arg) + " exceeds bound " +
                 print_qual(dep->param.qual));
      check_argument(env, colour_ctx, cp->arg, qt(cp->qual_arg, dep->param.shape), sp);
      return subst_qual_in_qualtype(dep->result, dep->var, cp->qual_arg);
    }

    if (auto* tp = term_as<ETApp>(t)) {
      QualType fn = infer(env, colour_ctx, tp->fn);
      auto* all = type_as<TAll>(fn.shape);
      if (!all)
        fail(diag_code::type, sp, "type application of a non-quantifier: " + print_qualtype(fn));
      if (!wf_simple(env, L, tp->arg)) fail(diag_code::wf, sp, "ill-formed type argument");
      if (!subtype_simple(env, L, tp->arg, all->bound))
        fail(diag_code::bound, sp,
             "type argument " + print_type(tp->arg) + " exceeds bound " + print_type(all->bound));
      colour_check(env, fn.qual, colour_ctx, sp);
      return subst_type_in_qualtype(all->body, all->var, tp->arg);
    }

    if (auto* qp = term_as<EQApp>(t)) {
      QualType fn = infer(env, colour_ctx, qp->fn);
      auto* all = type_as<TQAll>(fn.shape);
      if (!all)
        fail(diag_code::type, sp, "qualifier application of a non-quantifier: " + print_qualtype(fn));
      require_wf_qual(env, qp->arg, sp);
      if (!subqual(env, L, qp->arg, all->bound))
        fail(diag_code::bound, sp,
             "qualifier argument " + print_qual(qp->arg) + " exceeds bound " + print_qual(all->bound));
      colour_check(env, fn.qual, colour_ctx, sp);
      return subst_qual_in_qualtype(all->body, all->var, qp->arg);
    }

    if (auto* up = term_as<EUpqual>(t)) {
      require_wf_qual(env, up->qual, sp);
      QualType body = infer(env, colour_ctx, up->body);
      if (!subqual(env, L, body.qual, up->qual))
        fail(diag_code::subqual, sp,
             "cannot upqual " + print_qual(body.qual) + " to " + print_qual(up->qual));
      return qt(up->qual, body.shape);
    }

    if (auto* as = term_as<EAssert>(t)) {
      require_wf_qual(env, as->qual, sp);
      QualType body = infer(env, colour_ctx, as->body);
      if (!subqual(env, L, body.qual, as->qual))
        fail(diag_code::subqual, sp,
             "assertion " + print_qual(as->qual) + " not above " + print_qual(body.qual));
      return body;  // typ-assert leaves the type unchanged
    }

    if (auto* rf = term_as<ERef>(t)) {
      require_calculus(Calculus::Fm, sp, "references");
      require_wf_qual(env, rf->tag, sp);
      QualType init = infer(env, colour_ctx, rf->init);
      if (ctx_.ref_types) (*ctx_.ref_types)[t.get()] = init;
      return qt(rf->tag, t_box(init));
    }

    if (auto* dr = term_as<EDeref>(t)) {
      require_calculus(Calculus::Fm, sp, "references");
      QualType ref = infer(env, colour_ctx, dr->ref);
      auto* box = type_as<TBox>(ref.shape);
      if (!box) fail(diag_code::type, sp, "dereference of a non-box: " + print_qualtype(ref));
      // The mutability of the value read is joined with the mutability of
      // the reference itself.
      return qt(Qual::join(ref.qual, box->content.qual), box->content.shape);
    }

    if (auto* asg = term_as<EAssign>(t)) {
      require_calculus(Calculus::Fm, sp, "references");
      QualType target = infer(env, colour_ctx, asg->target);
      auto* box = type_as<TBox>(target.shape);
      if (!box) fail(diag_code::type, sp, "assignment to a non-box: " + print_qualtype(target));
      if (!subqual(env, L, target.qual, Qual::bot()))
        fail(diag_code::write_readonly, sp,
             "write through a box not provably mutable: {" + print_qual(target.qual) + "} Box");
      check_argument(env, colour_ctx, asg->value, box->content, sp);
      return qt(Qual::bot(), t_unit());
    }

    if (auto* lc = term_as<ELoc>(t)) {
      require_calculus(Calculus::Fm, sp, "locations");
      if (!ctx_.store_typing)
        fail(diag_code::type, sp, "location outside of a store-typed configuration");
      auto ty = ctx_.store_typing->find(lc->id);
      if (ty == ctx_.store_typing->end())
        fail(diag_code::type, sp, "dangling location " + std::to_string(lc->id));
      require_wf_qual(env, lc->tag, sp);
      return qt(lc->tag, t_box(ty->second));
    }

    fail(diag_code::type, sp, "unsupported term form");
  }

 private:
  void require_calculus(Calculus c, const Span& sp, const std::string& what) {
    bool ok = ctx_.calculus == c;
    if (!ok)
      fail(diag_code::type, sp,
           what + " not available in calculus " + calculus_name(ctx_.calculus));
  }
  void require_wf_qual(const Env& env, const QualPtr& q, const Span& sp) {
    if (!well_formed_qual(env, *ctx_.base, q))
      fail(diag_code::wf, sp, "ill-formed qualifier " + print_qual(q));
  }
  void require_wf_qualtype(const Env& env, const QualType& t, const Span& sp) {
    if (!wf_qualtype(env, *ctx_.base, t))
      fail(diag_code::wf, sp, "ill-formed type " + print_qualtype(t));
  }
  void require_subtype(const Env& env, const QualType& found, const QualType& expected, const Span& sp) {
    if (!subtype_holds(env, *ctx_.base, found, expected))
      fail(diag_code::type, sp,
           "expected " + print_qualtype(expected) + ", found " + print_qualtype(found));
  }
  // Checks a term against an expected type.  Introduction forms recurse so
  // that a reference initializer may sit at any subtype of the expected box
  // content; Box itself is invariant, so comparing synthesized minimal types
  // would wrongly reject mid-reduction initializers.
  void check_argument(const Env& env, const QualPtr& colour_ctx, const TermPtr& t,
                      const QualType& expected, const Span& sp) {
    if (auto* rf = term_as<ERef>(t)) {
      if (auto* box = type_as<TBox>(expected.shape)) {
        require_calculus(Calculus::Fm, sp, "references");
        require_wf_qual(env, rf->tag, sp);
        if (!subqual(env, *ctx_.base, rf->tag, expected.qual))
          fail(diag_code::type, sp,
               "expected " + print_qualtype(expected) + ", found a {" + print_qual(rf->tag) + "} box");
        check_argument(env, colour_ctx, rf->init, box->content, sp);
        if (ctx_.ref_types) (*ctx_.ref_types)[t.get()] = box->content;
        return;
      }
    }
    if (auto* up = term_as<EUpqual>(t)) {
      require_wf_qual(env, up->qual, sp);
      if (!subqual(env, *ctx_.base, up->qual, expected.qual))
        fail(diag_code::type, sp,
             "expected " + print_qualtype(expected) + ", found an upqual to " + print_qual(up->qual));
      check_argument(env, colour_ctx, up->body, qt(up->qual, expected.shape), sp);
      return;
    }
    if (auto* as = term_as<EAssert>(t)) {
      require_wf_qual(env, as->qual, sp);
      check_argument(env, colour_ctx, as->body, qt(as->qual, t_top()), sp);
      check_argument(env, colour_ctx, as->body, expected, sp);
      return;
    }
    QualType found = infer(env, colour_ctx, t);
    require_subtype(env, found, expected, sp);
  }
  // fa: an application is admissible only when the callee's qualifier is
  // subqualified by the colour context.  Checked for term, type, and
  // qualifier application alike; abstraction bodies run at their own tag.
  void colour_check(const Env& env, const QualPtr& callee, const QualPtr& ctx, const Span& sp) {
    if (ctx_.calculus != Calculus::Fa) return;
    if (!subqual(env, *ctx_.base, callee, ctx))
      fail(diag_code::colour, sp,
           "colour " + print_qual(callee) + " not callable under context " + print_qual(ctx));
  }
  QualPtr body_colour(const QualPtr& tag, const QualPtr& outer) const {
    return ctx_.calculus == Calculus::Fa ? tag : outer;
  }
  // fc: the tag on a value must super-qualify the free variables it captures.
  void capture_check(const Env& env, const TermPtr& value, const QualPtr& tag, const Span& sp) {
    std::vector<std::string> fvs = free_term_vars_fc(value, env);
    QualPtr fv_join = join_of_vars(fvs);
    if (!subqual(env, *ctx_.base, fv_join, tag))
      fail(diag_code::capture, sp,
           "tag " + print_qual(tag) + " does not cover captured variables " + print_qual(fv_join));
  }

  CheckContext ctx_;
};

inline QualType type_of(const CheckContext& ctx, const Env& env, const TermPtr& t) {
  TypeChecker tc(ctx);
  return tc.infer(env, t);
}

// fq kernel convenience entry point.
inline QualType type_of(const Env& env, const TermPtr& t) {
  return type_of(CheckContext{}, env, t);
}

}  // namespace fq

#endif  // FQ_TYPECHECK_HPP
