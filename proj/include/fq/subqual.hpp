#ifndef FQ_SUBQUAL_HPP
#define FQ_SUBQUAL_HPP

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fq/ast.hpp"
#include "fq/lattice.hpp"
#include "fq/qual.hpp"

namespace fq {

// Derivation tree for the subqualification judgment env |- Q <: R.
struct SubqualDeriv;
using SqDerivPtr = std::shared_ptr<const SubqualDeriv>;

struct SubqualDeriv {
  std::string rule;
  QualPtr lhs, rhs;
  std::vector<SqDerivPtr> premises;
};

inline SqDerivPtr sq_node(std::string rule, QualPtr l, QualPtr r, std::vector<SqDerivPtr> prem = {}) {
  return std::make_shared<SubqualDeriv>(
      SubqualDeriv{std::move(rule), std::move(l), std::move(r), std::move(prem)});
}

// ---------------------------------------------------------------------------
// Well-formedness.

inline bool well_formed_qual(const Env& env, const FiniteLattice& L, const QualPtr& q) {
  switch (q->kind) {
    case QualKind::Top:
    case QualKind::Bot:
      return true;
    case QualKind::Const:
      return L.has(q->name);
    case QualKind::Var:
      return env.lookup_qual_namespace(q->name) != nullptr;
    case QualKind::Join:
    case QualKind::Meet:
      return well_formed_qual(env, L, q->lhs) && well_formed_qual(env, L, q->rhs);
  }
  return false;
}

// Each bound may mention only names declared earlier; names unique per
// namespace.  Only the qualifier content is checked here; type bounds are
// validated by the type checker's wf_env.
inline bool env_well_formed_quals(const Env& env, const FiniteLattice& L) {
  Env prefix;
  for (const Binding& b : env.entries()) {
    switch (b.kind) {
      case BindKind::QualVar:
        if (prefix.lookup_qual(b.name)) return false;
        if (!well_formed_qual(prefix, L, b.qual_bound)) return false;
        prefix = prefix.with_qual_var(b.name, b.qual_bound);
        break;
      case BindKind::TermVar:
        if (prefix.lookup_term(b.name)) return false;
        if (!well_formed_qual(prefix, L, b.term_type.qual)) return false;
        prefix = prefix.with_term_var(b.name, b.term_type);
        break;
      case BindKind::TypeVar:
        if (prefix.lookup_type(b.name)) return false;
        prefix = prefix.with_type_var(b.name, b.type_bound);
        break;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// The decision procedure.  Backtracking proof search over the rule set
//
//   sq-top  sq-bot  sq-refl-var  sq-refl-tvar  sq-lift
//   sq-join-elim  sq-meet-intro           (invertible, committed)
//   sq-meet-elim-1/2  sq-join-intro-1/2   (backtracked)
//   sq-var  sq-tvar                       (bound expansion)
//
// with sq-eval-elim / sq-eval-intro realized by collapsing maximal ground
// subterms before the search.  Ground collapse makes the remaining rules
// syntax directed except for the backtracked group, which is exactly the
// Whitman condition for free lattices.  Goals already on the search path are
// treated as failures; completed results are memoized (failures only when
// they did not depend on an in-progress goal).
class SubqualSearch {
 public:
  SubqualSearch(const Env& env, const FiniteLattice& base) : env_(env), base_(base) {}

  // Normalizes both sides, wrapping eval nodes around the core derivation
  // when normalization changed a side.  Returns nullptr when not derivable.
  SqDerivPtr prove(const QualPtr& q, const QualPtr& r) {
    bool tainted = false;
    return prove_impl(q, r, tainted);
  }

 private:
  SqDerivPtr prove_impl(const QualPtr& q, const QualPtr& r, bool& tainted) {
    QualPtr qn = normalize(base_, q);
    QualPtr rn = normalize(base_, r);
    SqDerivPtr d = core(qn, rn, tainted);
    if (!d) return nullptr;
    if (!qual_eq(rn, r)) d = sq_node("sq-eval-intro", qn, r, {d});
    if (!qual_eq(qn, q)) d = sq_node("sq-eval-elim", q, r, {d});
    return d;
  }

  SqDerivPtr core(const QualPtr& q, const QualPtr& r, bool& tainted) {
    const std::pair<std::string, std::string> key{qual_key(q), qual_key(r)};
    if (auto it = success_.find(key); it != success_.end()) return it->second;
    if (failed_.count(key)) return nullptr;
    if (in_progress_.count(key)) {
      tainted = true;
      return nullptr;
    }
    in_progress_.insert(key);
    bool local_taint = false;
    SqDerivPtr d = rules(q, r, local_taint);
    in_progress_.erase(key);
    if (d) {
      success_.emplace(key, d);
    } else {
      if (!local_taint) failed_.insert(key);
      tainted = tainted || local_taint;
    }
    return d;
  }

  SqDerivPtr rules(const QualPtr& q, const QualPtr& r, bool& tainted) {
    // Bounded-lattice axioms.
    if (r->kind == QualKind::Top) return sq_node("sq-top", q, r);
    if (q->kind == QualKind::Bot) return sq_node("sq-bot", q, r);
    // Variable reflexivity.
    if (q->kind == QualKind::Var && r->kind == QualKind::Var && q->name == r->name) {
      const Binding* b = env_.lookup_qual_namespace(q->name);
      return sq_node(b && b->kind == BindKind::TermVar ? "sq-refl-tvar" : "sq-refl-var", q, r);
    }
    // Base-lattice order.
    if (q->kind == QualKind::Const && r->kind == QualKind::Const)
      return base_.leq(q->name, r->name) ? sq_node("sq-lift", q, r) : nullptr;
    // Invertible decompositions.
    if (q->kind == QualKind::Join) {
      SqDerivPtr l = core(q->lhs, r, tainted);
      if (!l) return nullptr;
      SqDerivPtr rr = core(q->rhs, r, tainted);
      if (!rr) return nullptr;
      return sq_node("sq-join-elim", q, r, {l, rr});
    }
    if (r->kind == QualKind::Meet) {
      SqDerivPtr l = core(q, r->lhs, tainted);
      if (!l) return nullptr;
      SqDerivPtr rr = core(q, r->rhs, tainted);
      if (!rr) return nullptr;
      return sq_node("sq-meet-intro", q, r, {l, rr});
    }
    // Whitman alternatives, backtracked.
    if (q->kind == QualKind::Meet) {
      if (SqDerivPtr d = core(q->lhs, r, tainted)) return sq_node("sq-meet-elim-1", q, r, {d});
      if (SqDerivPtr d = core(q->rhs, r, tainted)) return sq_node("sq-meet-elim-2", q, r, {d});
    }
    if (r->kind == QualKind::Join) {
      if (SqDerivPtr d = core(q, r->lhs, tainted)) return sq_node("sq-join-intro-1", q, r, {d});
      if (SqDerivPtr d = core(q, r->rhs, tainted)) return sq_node("sq-join-intro-2", q, r, {d});
    }
    // Bound expansion for variables.
    if (q->kind == QualKind::Var) {
      const Binding* b = env_.lookup_qual_namespace(q->name);
      if (b) {
        if (SqDerivPtr d = prove_impl(qual_bound_of(*b), r, tainted))
          return sq_node(b->kind == BindKind::TermVar ? "sq-tvar" : "sq-var", q, r, {d});
      }
    }
    return nullptr;
  }

  const Env& env_;
  const FiniteLattice& base_;
  std::map<std::pair<std::string, std::string>, SqDerivPtr> success_;
  std::set<std::pair<std::string, std::string>> failed_;
  std::set<std::pair<std::string, std::string>> in_progress_;
};

// env |- Q <: R over base lattice L; nullptr when not derivable.
// Throws std::invalid_argument on ill-formed input.
inline SqDerivPtr subqual(const Env& env, const FiniteLattice& L, const QualPtr& q, const QualPtr& r) {
  if (!env_well_formed_quals(env, L)) throw std::invalid_argument("IllFormedInput: environment");
  if (!well_formed_qual(env, L, q)) throw std::invalid_argument("IllFormedInput: left formula");
  if (!well_formed_qual(env, L, r)) throw std::invalid_argument("IllFormedInput: right formula");
  SubqualSearch search(env, L);
  return search.prove(q, r);
}

// Two-point mode: the extended system instantiated with the builtin 2-chain.
inline SqDerivPtr subqual(const Env& env, const QualPtr& q, const QualPtr& r) {
  return subqual(env, two_point(), q, r);
}

inline bool subqual_holds(const Env& env, const FiniteLattice& L, const QualPtr& q, const QualPtr& r) {
  return subqual(env, L, q, r) != nullptr;
}

inline bool qual_equiv(const Env& env, const FiniteLattice& L, const QualPtr& q, const QualPtr& r) {
  return subqual_holds(env, L, q, r) && subqual_holds(env, L, r, q);
}

// ---------------------------------------------------------------------------
// Derivation replay: re-checks that every node's premises match its rule's
// schema and that leaf side conditions hold.

inline bool replay_subqual(const Env& env, const FiniteLattice& L, const SqDerivPtr& d) {
  if (!d) return false;
  const QualPtr& q = d->lhs;
  const QualPtr& r = d->rhs;
  auto premise_ok = [&](std::size_t i, const QualPtr& pl, const QualPtr& pr) {
    return i < d->premises.size() && qual_eq(d->premises[i]->lhs, pl) &&
           qual_eq(d->premises[i]->rhs, pr) && replay_subqual(env, L, d->premises[i]);
  };
  if (d->rule == "sq-top") return r->kind == QualKind::Top && d->premises.empty();
  if (d->rule == "sq-bot") return q->kind == QualKind::Bot && d->premises.empty();
  if (d->rule == "sq-refl-var" || d->rule == "sq-refl-tvar") {
    if (q->kind != QualKind::Var || r->kind != QualKind::Var || q->name != r->name) return false;
    const Binding* b = env.lookup_qual_namespace(q->name);
    bool term = b && b->kind == BindKind::TermVar;
    return d->premises.empty() && (d->rule == "sq-refl-tvar") == term;
  }
  if (d->rule == "sq-lift")
    return q->kind == QualKind::Const && r->kind == QualKind::Const && L.leq(q->name, r->name) &&
           d->premises.empty();
  if (d->rule == "sq-join-elim")
    return q->kind == QualKind::Join && d->premises.size() == 2 && premise_ok(0, q->lhs, r) &&
           premise_ok(1, q->rhs, r);
  if (d->rule == "sq-meet-intro")
    return r->kind == QualKind::Meet && d->premises.size() == 2 && premise_ok(0, q, r->lhs) &&
           premise_ok(1, q, r->rhs);
  if (d->rule == "sq-meet-elim-1")
    return q->kind == QualKind::Meet && d->premises.size() == 1 && premise_ok(0, q->lhs, r);
  if (d->rule == "sq-meet-elim-2")
    return q->kind == QualKind::Meet && d->premises.size() == 1 && premise_ok(0, q->rhs, r);
  if (d->rule == "sq-join-intro-1")
    return r->kind == QualKind::Join && d->premises.size() == 1 && premise_ok(0, q, r->lhs);
  if (d->rule == "sq-join-intro-2")
    return r->kind == QualKind::Join && d->premises.size() == 1 && premise_ok(0, q, r->rhs);
  if (d->rule == "sq-var" || d->rule == "sq-tvar") {
    if (q->kind != QualKind::Var) return false;
    const Binding* b = env.lookup_qual_namespace(q->name);
    if (!b) return false;
    if ((d->rule == "sq-tvar") != (b->kind == BindKind::TermVar)) return false;
    return d->premises.size() == 1 && premise_ok(0, qual_bound_of(*b), r);
  }
  if (d->rule == "sq-eval-elim") {
    QualPtr qn = normalize(L, q);
    return !qual_eq(qn, q) && d->premises.size() == 1 && premise_ok(0, qn, r);
  }
  if (d->rule == "sq-eval-intro") {
    QualPtr rn = normalize(L, r);
    return !qual_eq(rn, r) && d->premises.size() == 1 && premise_ok(0, q, rn);
  }
  return false;
}

}  // namespace fq

#endif  // FQ_SUBQUAL_HPP
