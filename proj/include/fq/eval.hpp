#ifndef FQ_EVAL_HPP
#define FQ_EVAL_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "fq/ast.hpp"
#include "fq/lattice.hpp"
#include "fq/printer.hpp"

namespace fq {

inline bool is_value(const TermPtr& t) {
  return term_as<EAbs>(t) || term_as<ETAbs>(t) || term_as<EQAbs>(t) || term_as<ECAbs>(t) ||
         term_as<ELoc>(t) || term_as<EUnitV>(t);
}

inline QualPtr tag_of_value(const TermPtr& v) {
  if (auto* a = term_as<EAbs>(v)) return a->tag;
  if (auto* a = term_as<ETAbs>(v)) return a->tag;
  if (auto* a = term_as<EQAbs>(v)) return a->tag;
  if (auto* a = term_as<ECAbs>(v)) return a->tag;
  if (auto* a = term_as<ELoc>(v)) return a->tag;
  if (auto* a = term_as<EUnitV>(v)) return a->tag;
  return nullptr;
}

inline TermPtr retag_value(const TermPtr& v, const QualPtr& q) {
  if (auto* a = term_as<EAbs>(v)) return e_abs(q, a->param, a->param_type, a->body);
  if (auto* a = term_as<ETAbs>(v)) return e_tabs(q, a->var, a->bound, a->body);
  if (auto* a = term_as<EQAbs>(v)) return e_qabs(q, a->var, a->bound, a->body);
  if (auto* a = term_as<ECAbs>(v)) return e_cabs(q, a->param, a->param_type, a->body);
  if (auto* a = term_as<ELoc>(v)) return e_loc(a->id, q);
  if (term_as<EUnitV>(v)) return e_unit_tagged(q);
  return v;
}

// ---------------------------------------------------------------------------
// Store (fm).  Entries remember the allocation-time tag next to the value.

struct StoreEntry {
  std::string tag;  // ground element label, fixed at allocation
  TermPtr value;
};

class Store {
 public:
  int alloc(std::string tag, TermPtr value) {
    int id = next_++;
    cells_.emplace(id, StoreEntry{std::move(tag), std::move(value)});
    return id;
  }
  bool has(int id) const { return cells_.count(id) != 0; }
  const StoreEntry& at(int id) const { return cells_.at(id); }
  void write(int id, TermPtr value) { cells_.at(id).value = std::move(value); }
  const std::map<int, StoreEntry>& cells() const { return cells_; }
  int size() const { return static_cast<int>(cells_.size()); }

 private:
  std::map<int, StoreEntry> cells_;
  int next_ = 0;
};

// Step events let the property suites observe allocations, writes, and the
// tag produced by each dereference.
struct EvAlloc {
  int id;
  TermPtr value;
  const Term* node = nullptr;  // the ref node that allocated, for store typing
};
struct EvWrite {
  int id;
};
struct EvDeref {
  int id;
  std::string ref_tag;     // eval of the reference's tag
  std::string result_tag;  // eval of the retagged result
};
using StepEvent = std::variant<std::monostate, EvAlloc, EvWrite, EvDeref>;

// ---------------------------------------------------------------------------
// Small-step reduction, call-by-value, left to right.

enum class StuckKind {
  AppNonFunction,
  AssertFailed,
  UpqualFailed,
  NonGroundTag,
  SealedWrite,
  DanglingLocation,
  BarrierViolation,
  OpenTerm,
  NeedsStore,
  IllFormed,
};

inline const char* stuck_kind_name(StuckKind k) {
  switch (k) {
    case StuckKind::AppNonFunction: return "AppNonFunction";
    case StuckKind::AssertFailed: return "AssertFailed";
    case StuckKind::UpqualFailed: return "UpqualFailed";
    case StuckKind::NonGroundTag: return "NonGroundTag";
    case StuckKind::SealedWrite: return "SealedWrite";
    case StuckKind::DanglingLocation: return "DanglingLocation";
    case StuckKind::BarrierViolation: return "BarrierViolation";
    case StuckKind::OpenTerm: return "OpenTerm";
    case StuckKind::NeedsStore: return "NeedsStore";
    case StuckKind::IllFormed: return "IllFormed";
  }
  return "?";
}

struct Stepped {
  TermPtr term;
};
struct IsValue {};
struct Stuck {
  StuckKind kind;
  std::string detail;
};
using StepResult = std::variant<Stepped, IsValue, Stuck>;

class Evaluator {
 public:
  explicit Evaluator(const FiniteLattice& base, Store* store = nullptr)
      : base_(base), store_(store) {}

  StepResult step(const TermPtr& t, StepEvent* ev = nullptr) {
    event_ = ev;
    if (event_) *event_ = std::monostate{};
    return go(t);
  }

 private:
  StepResult go(const TermPtr& t) {
    if (is_value(t)) return IsValue{};

    if (term_as<EVar>(t)) return Stuck{StuckKind::OpenTerm, "free variable " + print_term(t)};

    if (auto* ap = term_as<EApp>(t)) {
      if (!is_value(ap->fn)) return congr(ap->fn, [&](TermPtr f) { return e_app(f, ap->arg); });
      if (!is_value(ap->arg)) return congr(ap->arg, [&](TermPtr a) { return e_app(ap->fn, a); });
      auto* fn = term_as<EAbs>(ap->fn);
      if (!fn) return Stuck{StuckKind::AppNonFunction, print_term(ap->fn)};
      return Stepped{subst_term(fn->body, fn->param, ap->arg)};
    }

    if (auto* cp = term_as<ECApp>(t)) {
      if (!is_value(cp->fn))
        return congr(cp->fn, [&](TermPtr f) { return e_capp(f, cp->qual_arg, cp->arg); });
      if (!is_value(cp->arg))
        return congr(cp->arg, [&](TermPtr a) { return e_capp(cp->fn, cp->qual_arg, a); });
      auto* fn = term_as<ECAbs>(cp->fn);
      if (!fn) return Stuck{StuckKind::AppNonFunction, print_term(cp->fn)};
      return Stepped{subst_capp(fn->body, fn->param, cp->arg, cp->qual_arg)};
    }

    if (auto* tp = term_as<ETApp>(t)) {
      if (!is_value(tp->fn)) return congr(tp->fn, [&](TermPtr f) { return e_tapp(f, tp->arg); });
      auto* fn = term_as<ETAbs>(tp->fn);
      if (!fn) return Stuck{StuckKind::AppNonFunction, print_term(tp->fn)};
      return Stepped{subst_type_in_term(fn->body, fn->var, tp->arg)};
    }

    if (auto* qp = term_as<EQApp>(t)) {
      if (!is_value(qp->fn)) return congr(qp->fn, [&](TermPtr f) { return e_qapp(f, qp->arg); });
      auto* fn = term_as<EQAbs>(qp->fn);
      if (!fn) return Stuck{StuckKind::AppNonFunction, print_term(qp->fn)};
      // beta-Q substitutes into qualifier positions, tags included.
      return Stepped{subst_qual_in_term(fn->body, fn->var, qp->arg)};
    }

    if (auto* up = term_as<EUpqual>(t)) {
      if (!is_value(up->body)) return congr(up->body, [&](TermPtr b) { return e_upqual(up->qual, b); });
      auto chk = ground_leq(tag_of_value(up->body), up->qual);
      if (!chk.has_value()) return Stuck{StuckKind::NonGroundTag, print_term(t)};
      if (!*chk)
        return Stuck{StuckKind::UpqualFailed, "cannot upqual " + print_qual(tag_of_value(up->body)) +
                                                  " to " + print_qual(up->qual)};
      return Stepped{retag_value(up->body, up->qual)};
    }

    if (auto* as = term_as<EAssert>(t)) {
      if (!is_value(as->body)) return congr(as->body, [&](TermPtr b) { return e_assert(as->qual, b); });
      auto chk = ground_leq(tag_of_value(as->body), as->qual);
      if (!chk.has_value()) return Stuck{StuckKind::NonGroundTag, print_term(t)};
      if (!*chk)
        return Stuck{StuckKind::AssertFailed, "tag " + print_qual(tag_of_value(as->body)) +
                                                  " is not below " + print_qual(as->qual)};
      return Stepped{as->body};
    }

    if (auto* rf = term_as<ERef>(t)) {
      if (!store_) return Stuck{StuckKind::NeedsStore, "ref outside of fm"};
      if (!is_value(rf->init)) return congr(rf->init, [&](TermPtr i) { return e_ref(rf->tag, i); });
      auto tag = eval_ground(base_, rf->tag);
      if (!tag) return Stuck{StuckKind::NonGroundTag, print_term(t)};
      int id = store_->alloc(base_.label_of(*tag), rf->init);
      if (event_) *event_ = EvAlloc{id, rf->init, t.get()};
      return Stepped{e_loc(id, rf->tag)};
    }

    if (auto* dr = term_as<EDeref>(t)) {
      if (!store_) return Stuck{StuckKind::NeedsStore, "deref outside of fm"};
      if (!is_value(dr->ref)) return congr(dr->ref, [&](TermPtr r) { return e_deref(r); });
      auto* loc = term_as<ELoc>(dr->ref);
      if (!loc) return Stuck{StuckKind::IllFormed, "deref of a non-location"};
      if (!store_->has(loc->id)) return Stuck{StuckKind::DanglingLocation, std::to_string(loc->id)};
      const TermPtr& stored = store_->at(loc->id).value;
      auto ref_tag = eval_ground(base_, loc->tag);
      auto val_tag = eval_ground(base_, tag_of_value(stored));
      if (!ref_tag || !val_tag) return Stuck{StuckKind::NonGroundTag, print_term(t)};
      // Readonly propagates: the result carries the join of both tags.
      int joined = base_.join(*ref_tag, *val_tag);
      TermPtr out = retag_value(stored, canonical_const(base_, joined));
      if (event_) *event_ = EvDeref{loc->id, base_.label_of(*ref_tag), base_.label_of(joined)};
      return Stepped{out};
    }

    if (auto* asg = term_as<EAssign>(t)) {
      if (!store_) return Stuck{StuckKind::NeedsStore, "assignment outside of fm"};
      if (!is_value(asg->target))
        return congr(asg->target, [&](TermPtr l) { return e_assign(l, asg->value); });
      if (!is_value(asg->value))
        return congr(asg->value, [&](TermPtr v) { return e_assign(asg->target, v); });
      auto* loc = term_as<ELoc>(asg->target);
      if (!loc) return Stuck{StuckKind::IllFormed, "assignment to a non-location"};
      if (!store_->has(loc->id)) return Stuck{StuckKind::DanglingLocation, std::to_string(loc->id)};
      auto ref_tag = eval_ground(base_, loc->tag);
      if (!ref_tag) return Stuck{StuckKind::NonGroundTag, print_term(t)};
      if (*ref_tag != base_.bottom_index())
        return Stuck{StuckKind::SealedWrite,
                     "location " + std::to_string(loc->id) + " is sealed at " + base_.label_of(*ref_tag)};
      store_->write(loc->id, asg->value);
      if (event_) *event_ = EvWrite{loc->id};
      return Stepped{e_unit()};
    }

    return Stuck{StuckKind::IllFormed, print_term(t)};
  }

  template <class Rebuild>
  StepResult congr(const TermPtr& sub, Rebuild rebuild) {
    StepResult r = go(sub);
    if (auto* s = std::get_if<Stepped>(&r)) return Stepped{rebuild(s->term)};
    if (std::get_if<IsValue>(&r)) return Stuck{StuckKind::IllFormed, "congruence on a value"};
    return r;
  }

  std::optional<bool> ground_leq(const QualPtr& a, const QualPtr& b) const {
    if (!a || !b) return std::nullopt;
    auto ea = eval_ground(base_, a), eb = eval_ground(base_, b);
    if (!ea || !eb) return std::nullopt;
    return base_.leq(*ea, *eb);
  }

  const FiniteLattice& base_;
  Store* store_;
  StepEvent* event_ = nullptr;
};

inline StepResult step(const FiniteLattice& L, const TermPtr& t, Store* store = nullptr,
                       StepEvent* ev = nullptr) {
  Evaluator e(L, store);
  return e.step(t, ev);
}

inline StepResult step(const TermPtr& t) { return step(two_point(), t); }

// ---------------------------------------------------------------------------
// Fuelled evaluation.

struct EvalValue {
  TermPtr value;
  int steps = 0;
};
struct EvalStuck {
  Stuck stuck;
  TermPtr at;
  int steps = 0;
};
struct OutOfFuel {
  TermPtr last;
};
using EvalResult = std::variant<EvalValue, EvalStuck, OutOfFuel>;

inline EvalResult eval_fuel(const FiniteLattice& L, TermPtr t, int fuel, Store* store = nullptr) {
  Evaluator e(L, store);
  for (int i = 0; i < fuel; ++i) {
    StepResult r = e.step(t);
    if (auto* s = std::get_if<Stepped>(&r)) {
      t = s->term;
      continue;
    }
    if (std::get_if<IsValue>(&r)) return EvalValue{t, i};
    return EvalStuck{std::get<Stuck>(r), t, i};
  }
  if (is_value(t)) return EvalValue{t, fuel};
  return OutOfFuel{t};
}

inline EvalResult eval_fuel(TermPtr t, int fuel) { return eval_fuel(two_point(), std::move(t), fuel); }

}  // namespace fq

#endif  // FQ_EVAL_HPP
