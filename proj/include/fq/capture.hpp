#ifndef FQ_CAPTURE_HPP
#define FQ_CAPTURE_HPP

#include <string>
#include <vector>

#include "fq/ast.hpp"
#include "fq/eval.hpp"
#include "fq/typecheck.hpp"

namespace fq {

// Subqualification over environments whose term bindings double as qualifier
// variables (rules sq-refl-tvar / sq-tvar) is the plain search; these helpers
// just fix the calculus.

inline QualType type_of_fc(const FiniteLattice& L, const Env& env, const TermPtr& t) {
  CheckContext ctx;
  ctx.calculus = Calculus::Fc;
  ctx.base = &L;
  return type_of(ctx, env, t);
}

inline QualType type_of_fc(const Env& env, const TermPtr& t) { return type_of_fc(two_point(), env, t); }

// Capture prediction: a well-typed value's qualifier sits above the join of
// its free term variables.
inline bool capture_prediction_check(const FiniteLattice& L, const Env& env, const TermPtr& v) {
  if (!is_value(v)) return false;
  QualType ty;
  try {
    ty = type_of_fc(L, env, v);
  } catch (const TypeError&) {
    return false;
  }
  QualPtr fv_join = join_of_vars(free_term_vars_fc(v, env));
  return subqual_holds(env, L, fv_join, ty.qual);
}

// Checks the prediction for every value subterm, extending the environment
// under binders.  Drives the fc soundness suite.
inline bool capture_prediction_everywhere(const FiniteLattice& L, const Env& env, const TermPtr& t) {
  if (is_value(t) && !term_as<ELoc>(t) && !term_as<EUnitV>(t)) {
    if (!capture_prediction_check(L, env, t)) return false;
  }
  if (auto* ca = term_as<ECAbs>(t))
    return capture_prediction_everywhere(L, env.with_term_var(ca->param, ca->param_type), ca->body);
  if (auto* ta = term_as<ETAbs>(t))
    return capture_prediction_everywhere(L, env.with_type_var(ta->var, ta->bound), ta->body);
  if (auto* qa = term_as<EQAbs>(t))
    return capture_prediction_everywhere(L, env.with_qual_var(qa->var, qa->bound), qa->body);
  if (auto* cp = term_as<ECApp>(t))
    return capture_prediction_everywhere(L, env, cp->fn) &&
           capture_prediction_everywhere(L, env, cp->arg);
  if (auto* up = term_as<EUpqual>(t)) return capture_prediction_everywhere(L, env, up->body);
  if (auto* as = term_as<EAssert>(t)) return capture_prediction_everywhere(L, env, as->body);
  if (auto* tp = term_as<ETApp>(t)) return capture_prediction_everywhere(L, env, tp->fn);
  if (auto* qp = term_as<EQApp>(t)) return capture_prediction_everywhere(L, env, qp->fn);
  return true;
}

}  // namespace fq

#endif  // FQ_CAPTURE_HPP
