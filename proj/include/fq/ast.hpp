#ifndef FQ_AST_HPP
#define FQ_AST_HPP

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fq/qual.hpp"

namespace fq {

enum class Calculus { Fq, Fm, Fa, Fc };

inline const char* calculus_name(Calculus c) {
  switch (c) {
    case Calculus::Fq: return "fq";
    case Calculus::Fm: return "fm";
    case Calculus::Fa: return "fa";
    case Calculus::Fc: return "fc";
  }
  return "?";
}

struct Span {
  int line = 0, col = 0;  // 0 = unknown (programmatic AST)
};

// ---------------------------------------------------------------------------
// Simple types and qualified types.

struct SimpleType;
using TypePtr = std::shared_ptr<const SimpleType>;

struct QualType {
  QualPtr qual;
  TypePtr shape;
};

struct TTop {};
struct TUnit {};
struct TVar {
  std::string name;
};
struct TArrow {
  QualType param, result;
};
struct TAll {  // all (X <: S) . T
  std::string var;
  TypePtr bound;
  QualType body;
};
struct TQAll {  // qall (Y <: Q) . T
  std::string var;
  QualPtr bound;
  QualType body;
};
struct TBox {
  QualType content;
};
struct TDepArrow {  // (x <: Q : S) -> T, with param = {Q} S and x in scope in T
  std::string var;
  QualType param;
  QualType result;
};

struct SimpleType {
  std::variant<TTop, TUnit, TVar, TArrow, TAll, TQAll, TBox, TDepArrow> node;
};

template <class T, class... Args>
TypePtr mk_type(Args&&... args) {
  return std::make_shared<SimpleType>(SimpleType{T{std::forward<Args>(args)...}});
}

template <class T>
const T* type_as(const TypePtr& t) {
  return std::get_if<T>(&t->node);
}

inline TypePtr t_top() { return mk_type<TTop>(); }
inline TypePtr t_unit() { return mk_type<TUnit>(); }
inline TypePtr t_var(std::string n) { return mk_type<TVar>(std::move(n)); }
inline TypePtr t_arrow(QualType p, QualType r) { return mk_type<TArrow>(std::move(p), std::move(r)); }
inline TypePtr t_all(std::string v, TypePtr b, QualType body) {
  return mk_type<TAll>(std::move(v), std::move(b), std::move(body));
}
inline TypePtr t_qall(std::string v, QualPtr b, QualType body) {
  return mk_type<TQAll>(std::move(v), std::move(b), std::move(body));
}
inline TypePtr t_box(QualType c) { return mk_type<TBox>(std::move(c)); }
inline TypePtr t_dep_arrow(std::string v, QualType p, QualType r) {
  return mk_type<TDepArrow>(std::move(v), std::move(p), std::move(r));
}
inline QualType qt(QualPtr q, TypePtr s) { return QualType{std::move(q), std::move(s)}; }

// ---------------------------------------------------------------------------
// Terms.

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct EVar {
  std::string name;
};
struct EAbs {  // fn[P](x: T) => body
  QualPtr tag;
  std::string param;
  QualType param_type;
  TermPtr body;
};
struct ETAbs {  // tfn[P](X <: S) => body
  QualPtr tag;
  std::string var;
  TypePtr bound;
  TermPtr body;
};
struct EQAbs {  // qfn[P](Y <: Q) => body
  QualPtr tag;
  std::string var;
  QualPtr bound;
  TermPtr body;
};
struct EApp {
  TermPtr fn, arg;
};
struct ETApp {  // fn [S]
  TermPtr fn;
  TypePtr arg;
};
struct EQApp {  // fn [{Q}]
  TermPtr fn;
  QualPtr arg;
};
struct EUpqual {
  QualPtr qual;
  TermPtr body;
};
struct EAssert {
  QualPtr qual;
  TermPtr body;
};
struct ERef {  // ref[P] t
  QualPtr tag;
  TermPtr init;
};
struct EDeref {  // !t
  TermPtr ref;
};
struct EAssign {  // t := t
  TermPtr target, value;
};
struct ELoc {  // runtime only; the tag is the reference's own mutability
  int id = -1;
  QualPtr tag;
};
struct EUnitV {
  QualPtr tag;  // bot unless retagged
};
struct ECAbs {  // fn[P](x <: Q : S) => body; param_type = {Q} S
  QualPtr tag;
  std::string param;
  QualType param_type;
  TermPtr body;
};
struct ECApp {  // fn [{Q}] arg
  TermPtr fn;
  QualPtr qual_arg;
  TermPtr arg;
};

struct Term {
  std::variant<EVar, EAbs, ETAbs, EQAbs, EApp, ETApp, EQApp, EUpqual, EAssert, ERef, EDeref,
               EAssign, ELoc, EUnitV, ECAbs, ECApp>
      node;
  Span span;
};

template <class T, class... Args>
TermPtr mk_term(Args&&... args) {
  return std::make_shared<Term>(Term{T{std::forward<Args>(args)...}, Span{}});
}

inline TermPtr with_span(TermPtr t, Span sp) {
  auto copy = std::make_shared<Term>(*t);
  copy->span = sp;
  return copy;
}

template <class T>
const T* term_as(const TermPtr& t) {
  return std::get_if<T>(&t->node);
}

inline TermPtr e_var(std::string n) { return mk_term<EVar>(std::move(n)); }
inline TermPtr e_abs(QualPtr tag, std::string x, QualType T, TermPtr b) {
  return mk_term<EAbs>(std::move(tag), std::move(x), std::move(T), std::move(b));
}
inline TermPtr e_tabs(QualPtr tag, std::string X, TypePtr S, TermPtr b) {
  return mk_term<ETAbs>(std::move(tag), std::move(X), std::move(S), std::move(b));
}
inline TermPtr e_qabs(QualPtr tag, std::string Y, QualPtr Q, TermPtr b) {
  return mk_term<EQAbs>(std::move(tag), std::move(Y), std::move(Q), std::move(b));
}
inline TermPtr e_app(TermPtr f, TermPtr a) { return mk_term<EApp>(std::move(f), std::move(a)); }
inline TermPtr e_tapp(TermPtr f, TypePtr S) { return mk_term<ETApp>(std::move(f), std::move(S)); }
inline TermPtr e_qapp(TermPtr f, QualPtr Q) { return mk_term<EQApp>(std::move(f), std::move(Q)); }
inline TermPtr e_upqual(QualPtr Q, TermPtr t) { return mk_term<EUpqual>(std::move(Q), std::move(t)); }
inline TermPtr e_assert(QualPtr Q, TermPtr t) { return mk_term<EAssert>(std::move(Q), std::move(t)); }
inline TermPtr e_ref(QualPtr P, TermPtr t) { return mk_term<ERef>(std::move(P), std::move(t)); }
inline TermPtr e_deref(TermPtr t) { return mk_term<EDeref>(std::move(t)); }
inline TermPtr e_assign(TermPtr l, TermPtr r) { return mk_term<EAssign>(std::move(l), std::move(r)); }
inline TermPtr e_loc(int id, QualPtr tag) { return mk_term<ELoc>(id, std::move(tag)); }
inline TermPtr e_unit() { return mk_term<EUnitV>(Qual::bot()); }
inline TermPtr e_unit_tagged(QualPtr t) { return mk_term<EUnitV>(std::move(t)); }
inline TermPtr e_cabs(QualPtr tag, std::string x, QualType bound_and_shape, TermPtr b) {
  return mk_term<ECAbs>(std::move(tag), std::move(x), std::move(bound_and_shape), std::move(b));
}
inline TermPtr e_capp(TermPtr f, QualPtr Q, TermPtr a) {
  return mk_term<ECApp>(std::move(f), std::move(Q), std::move(a));
}

// ---------------------------------------------------------------------------
// Environments.  One ordered context holding all three namespaces.

enum class BindKind { QualVar, TypeVar, TermVar };

struct Binding {
  BindKind kind;
  std::string name;
  QualPtr qual_bound;  // QualVar
  TypePtr type_bound;  // TypeVar
  QualType term_type;  // TermVar
};

class Env {
 public:
  Env() = default;

  const std::vector<Binding>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  Env with_qual_var(std::string name, QualPtr bound) const {
    Env e = *this;
    e.entries_.push_back(Binding{BindKind::QualVar, std::move(name), std::move(bound), nullptr, {}});
    return e;
  }
  Env with_type_var(std::string name, TypePtr bound) const {
    Env e = *this;
    e.entries_.push_back(Binding{BindKind::TypeVar, std::move(name), nullptr, std::move(bound), {}});
    return e;
  }
  Env with_term_var(std::string name, QualType type) const {
    Env e = *this;
    e.entries_.push_back(Binding{BindKind::TermVar, std::move(name), nullptr, nullptr, std::move(type)});
    return e;
  }

  const Binding* lookup(BindKind kind, const std::string& name) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
      if (it->kind == kind && it->name == name) return &*it;
    return nullptr;
  }
  const Binding* lookup_qual(const std::string& name) const { return lookup(BindKind::QualVar, name); }
  const Binding* lookup_type(const std::string& name) const { return lookup(BindKind::TypeVar, name); }
  const Binding* lookup_term(const std::string& name) const { return lookup(BindKind::TermVar, name); }

  // Variable occurring in qualifier position: a qualifier variable, or a term
  // variable (capture calculus).  Returns the binding and its qualifier bound.
  const Binding* lookup_qual_namespace(const std::string& name) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
      if ((it->kind == BindKind::QualVar || it->kind == BindKind::TermVar) && it->name == name) return &*it;
    return nullptr;
  }

 private:
  std::vector<Binding> entries_;
};

inline QualPtr qual_bound_of(const Binding& b) {
  return b.kind == BindKind::QualVar ? b.qual_bound : b.term_type.qual;
}

// ---------------------------------------------------------------------------
// Free variables.

struct FreeVars {
  std::set<std::string> term, type, qual;  // qual: names free in qualifier position
};

namespace detail {

inline void fv_qual(const QualPtr& q, const std::set<std::string>& bound_qual, FreeVars& out) {
  std::set<std::string> vs;
  collect_qual_vars(q, vs);
  for (const auto& v : vs)
    if (!bound_qual.count(v)) out.qual.insert(v);
}

inline void fv_type(const TypePtr& t, std::set<std::string> bt, std::set<std::string> bq, FreeVars& out);

inline void fv_qualtype(const QualType& t, const std::set<std::string>& bt,
                        const std::set<std::string>& bq, FreeVars& out) {
  fv_qual(t.qual, bq, out);
  fv_type(t.shape, bt, bq, out);
}

inline void fv_type(const TypePtr& t, std::set<std::string> bt, std::set<std::string> bq, FreeVars& out) {
  if (auto* v = type_as<TVar>(t)) {
    if (!bt.count(v->name)) out.type.insert(v->name);
  } else if (auto* a = type_as<TArrow>(t)) {
    fv_qualtype(a->param, bt, bq, out);
    fv_qualtype(a->result, bt, bq, out);
  } else if (auto* al = type_as<TAll>(t)) {
    fv_type(al->bound, bt, bq, out);
    bt.insert(al->var);
    fv_qualtype(al->body, bt, bq, out);
  } else if (auto* qa = type_as<TQAll>(t)) {
    fv_qual(qa->bound, bq, out);
    bq.insert(qa->var);
    fv_qualtype(qa->body, bt, bq, out);
  } else if (auto* bx = type_as<TBox>(t)) {
    fv_qualtype(bx->content, bt, bq, out);
  } else if (auto* d = type_as<TDepArrow>(t)) {
    fv_qualtype(d->param, bt, bq, out);
    bq.insert(d->var);  // binds in result qualifiers only
    fv_qualtype(d->result, bt, bq, out);
  }
}

inline void fv_term(const TermPtr& t, std::set<std::string> btm, std::set<std::string> bt,
                    std::set<std::string> bq, FreeVars& out) {
  if (auto* v = term_as<EVar>(t)) {
    if (!btm.count(v->name)) out.term.insert(v->name);
  } else if (auto* ab = term_as<EAbs>(t)) {
    fv_qual(ab->tag, bq, out);
    fv_qualtype(ab->param_type, bt, bq, out);
    btm.insert(ab->param);
    fv_term(ab->body, btm, bt, bq, out);
  } else if (auto* ta = term_as<ETAbs>(t)) {
    fv_qual(ta->tag, bq, out);
    fv_type(ta->bound, bt, bq, out);
    bt.insert(ta->var);
    fv_term(ta->body, btm, bt, bq, out);
  } else if (auto* qa = term_as<EQAbs>(t)) {
    fv_qual(qa->tag, bq, out);
    fv_qual(qa->bound, bq, out);
    bq.insert(qa->var);
    fv_term(qa->body, btm, bt, bq, out);
  } else if (auto* ap = term_as<EApp>(t)) {
    fv_term(ap->fn, btm, bt, bq, out);
    fv_term(ap->arg, btm, bt, bq, out);
  } else if (auto* tp = term_as<ETApp>(t)) {
    fv_term(tp->fn, btm, bt, bq, out);
    fv_type(tp->arg, bt, bq, out);
  } else if (auto* qp = term_as<EQApp>(t)) {
    fv_term(qp->fn, btm, bt, bq, out);
    fv_qual(qp->arg, bq, out);
  } else if (auto* up = term_as<EUpqual>(t)) {
    fv_qual(up->qual, bq, out);
    fv_term(up->body, btm, bt, bq, out);
  } else if (auto* as = term_as<EAssert>(t)) {
    fv_qual(as->qual, bq, out);
    fv_term(as->body, btm, bt, bq, out);
  } else if (auto* rf = term_as<ERef>(t)) {
    fv_qual(rf->tag, bq, out);
    fv_term(rf->init, btm, bt, bq, out);
  } else if (auto* dr = term_as<EDeref>(t)) {
    fv_term(dr->ref, btm, bt, bq, out);
  } else if (auto* asg = term_as<EAssign>(t)) {
    fv_term(asg->target, btm, bt, bq, out);
    fv_term(asg->value, btm, bt, bq, out);
  } else if (auto* lc = term_as<ELoc>(t)) {
    fv_qual(lc->tag, bq, out);
  } else if (auto* u = term_as<EUnitV>(t)) {
    fv_qual(u->tag, bq, out);
  } else if (auto* ca = term_as<ECAbs>(t)) {
    fv_qual(ca->tag, bq, out);
    fv_qualtype(ca->param_type, bt, bq, out);
    btm.insert(ca->param);
    bq.insert(ca->param);  // binds in both namespaces
    fv_term(ca->body, btm, bt, bq, out);
  } else if (auto* cp = term_as<ECApp>(t)) {
    fv_term(cp->fn, btm, bt, bq, out);
    fv_qual(cp->qual_arg, bq, out);
    fv_term(cp->arg, btm, bt, bq, out);
  }
}

}  // namespace detail

inline FreeVars free_vars(const TermPtr& t) {
  FreeVars out;
  detail::fv_term(t, {}, {}, {}, out);
  return out;
}

inline FreeVars free_vars_type(const TypePtr& t) {
  FreeVars out;
  detail::fv_type(t, {}, {}, out);
  return out;
}

// Free term variables of a capture-calculus value: names free in term
// position plus names free in qualifier position that the environment binds
// as term variables.
inline std::vector<std::string> free_term_vars_fc(const TermPtr& t, const Env& env) {
  FreeVars fv = free_vars(t);
  std::set<std::string> names = fv.term;
  for (const auto& n : fv.qual)
    if (env.lookup_term(n) && !env.lookup_qual(n)) names.insert(n);
  return {names.begin(), names.end()};
}

inline bool is_closed_term(const TermPtr& t) {
  FreeVars fv = free_vars(t);
  return fv.term.empty() && fv.type.empty() && fv.qual.empty();
}

// ---------------------------------------------------------------------------
// Substitution.  All three substitutions walk terms/types; binders are
// alpha-renamed when they would capture.

namespace detail {

inline std::string fresh_name(const std::string& base, const std::set<std::string>& used) {
  if (!used.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!used.count(cand)) return cand;
  }
}

}  // namespace detail

TypePtr subst_qual_in_type(const TypePtr& t, const std::string& x, const QualPtr& r);

inline QualType subst_qual_in_qualtype(const QualType& t, const std::string& x, const QualPtr& r) {
  return {subst_qual(t.qual, x, r), subst_qual_in_type(t.shape, x, r)};
}

inline TypePtr subst_qual_in_type(const TypePtr& t, const std::string& x, const QualPtr& r) {
  if (type_as<TTop>(t) || type_as<TUnit>(t) || type_as<TVar>(t)) return t;
  if (auto* a = type_as<TArrow>(t))
    return t_arrow(subst_qual_in_qualtype(a->param, x, r), subst_qual_in_qualtype(a->result, x, r));
  if (auto* al = type_as<TAll>(t))
    return t_all(al->var, al->bound, subst_qual_in_qualtype(al->body, x, r));
  if (auto* qa = type_as<TQAll>(t)) {
    QualPtr bound = subst_qual(qa->bound, x, r);
    if (qa->var == x) return t_qall(qa->var, bound, qa->body);
    std::set<std::string> rv = qual_vars(r);
    std::string var = qa->var;
    QualType body = qa->body;
    if (rv.count(var)) {
      FreeVars fv;
      detail::fv_qualtype(body, {}, {}, fv);
      std::set<std::string> used = rv;
      used.insert(fv.qual.begin(), fv.qual.end());
      used.insert(x);
      std::string nv = detail::fresh_name(var, used);
      body = subst_qual_in_qualtype(body, var, Qual::var(nv));
      var = nv;
    }
    return t_qall(var, bound, subst_qual_in_qualtype(body, x, r));
  }
  if (auto* bx = type_as<TBox>(t)) return t_box(subst_qual_in_qualtype(bx->content, x, r));
  if (auto* d = type_as<TDepArrow>(t)) {
    QualType param = subst_qual_in_qualtype(d->param, x, r);
    if (d->var == x) return t_dep_arrow(d->var, param, d->result);
    std::set<std::string> rv = qual_vars(r);
    std::string var = d->var;
    QualType result = d->result;
    if (rv.count(var)) {
      FreeVars fv;
      detail::fv_qualtype(result, {}, {}, fv);
      std::set<std::string> used = rv;
      used.insert(fv.qual.begin(), fv.qual.end());
      used.insert(x);
      std::string nv = detail::fresh_name(var, used);
      result = subst_qual_in_qualtype(result, var, Qual::var(nv));
      var = nv;
    }
    return t_dep_arrow(var, param, subst_qual_in_qualtype(result, x, r));
  }
  return t;
}

TypePtr subst_type_in_type(const TypePtr& t, const std::string& x, const TypePtr& r);

inline QualType subst_type_in_qualtype(const QualType& t, const std::string& x, const TypePtr& r) {
  return {t.qual, subst_type_in_type(t.shape, x, r)};
}

inline TypePtr subst_type_in_type(const TypePtr& t, const std::string& x, const TypePtr& r) {
  if (auto* v = type_as<TVar>(t)) return v->name == x ? r : t;
  if (type_as<TTop>(t) || type_as<TUnit>(t)) return t;
  if (auto* a = type_as<TArrow>(t))
    return t_arrow(subst_type_in_qualtype(a->param, x, r), subst_type_in_qualtype(a->result, x, r));
  if (auto* al = type_as<TAll>(t)) {
    TypePtr bound = subst_type_in_type(al->bound, x, r);
    if (al->var == x) return t_all(al->var, bound, al->body);
    FreeVars rfv = free_vars_type(r);
    std::string var = al->var;
    QualType body = al->body;
    if (rfv.type.count(var)) {
      FreeVars bfv;
      detail::fv_qualtype(body, {}, {}, bfv);
      std::set<std::string> used = rfv.type;
      used.insert(bfv.type.begin(), bfv.type.end());
      used.insert(x);
      std::string nv = detail::fresh_name(var, used);
      body = subst_type_in_qualtype(body, var, t_var(nv));
      var = nv;
    }
    return t_all(var, bound, subst_type_in_qualtype(body, x, r));
  }
  if (auto* qa = type_as<TQAll>(t)) return t_qall(qa->var, qa->bound, subst_type_in_qualtype(qa->body, x, r));
  if (auto* bx = type_as<TBox>(t)) return t_box(subst_type_in_qualtype(bx->content, x, r));
  if (auto* d = type_as<TDepArrow>(t))
    return t_dep_arrow(d->var, subst_type_in_qualtype(d->param, x, r),
                       subst_type_in_qualtype(d->result, x, r));
  return t;
}

// ---------------------------------------------------------------------------
// Term-level substitutions, written as one configurable walker.

namespace detail {

struct Subst {
  // At most one of these is active per walk.
  const std::string* term_var = nullptr;
  TermPtr term_repl;
  const std::string* qual_var = nullptr;
  QualPtr qual_repl;
  const std::string* type_var = nullptr;
  TypePtr type_repl;
};

inline QualPtr apply_qual(const Subst& s, const QualPtr& q) {
  return s.qual_var ? subst_qual(q, *s.qual_var, s.qual_repl) : q;
}
inline TypePtr apply_type(const Subst& s, const TypePtr& t) {
  TypePtr r = t;
  if (s.qual_var) r = subst_qual_in_type(r, *s.qual_var, s.qual_repl);
  if (s.type_var) r = subst_type_in_type(r, *s.type_var, s.type_repl);
  return r;
}
inline QualType apply_qualtype(const Subst& s, const QualType& t) {
  return {apply_qual(s, t.qual), apply_type(s, t.shape)};
}

TermPtr walk(const Subst& s, const TermPtr& t);

// Renames the term binder of an abstraction body when it would capture.
inline std::pair<std::string, TermPtr> avoid_term_capture(const Subst& s, const std::string& binder,
                                                          const TermPtr& body, bool binds_qual_too) {
  std::set<std::string> danger;
  if (s.term_var && s.term_repl) {
    FreeVars fv = free_vars(s.term_repl);
    danger.insert(fv.term.begin(), fv.term.end());
    if (binds_qual_too) danger.insert(fv.qual.begin(), fv.qual.end());
  }
  if (binds_qual_too && s.qual_var && s.qual_repl) {
    std::set<std::string> qv = qual_vars(s.qual_repl);
    danger.insert(qv.begin(), qv.end());
  }
  if (!danger.count(binder)) return {binder, body};
  FreeVars bfv = free_vars(body);
  std::set<std::string> used = danger;
  used.insert(bfv.term.begin(), bfv.term.end());
  used.insert(bfv.qual.begin(), bfv.qual.end());
  if (s.term_var) used.insert(*s.term_var);
  if (s.qual_var) used.insert(*s.qual_var);
  std::string fresh = fresh_name(binder, used);
  Subst rename;
  TermPtr fresh_var = e_var(fresh);
  rename.term_var = &binder;
  rename.term_repl = fresh_var;
  TermPtr renamed = walk(rename, body);
  if (binds_qual_too) {
    Subst qrename;
    QualPtr fq = Qual::var(fresh);
    qrename.qual_var = &binder;
    qrename.qual_repl = fq;
    renamed = walk(qrename, renamed);
  }
  return {fresh, renamed};
}

inline TermPtr walk(const Subst& s, const TermPtr& t) {
  if (auto* v = term_as<EVar>(t)) {
    if (s.term_var && v->name == *s.term_var) return s.term_repl;
    return t;
  }
  if (auto* ab = term_as<EAbs>(t)) {
    QualPtr tag = apply_qual(s, ab->tag);
    QualType pt = apply_qualtype(s, ab->param_type);
    if (s.term_var && ab->param == *s.term_var) return e_abs(tag, ab->param, pt, ab->body);
    auto [x, body] = avoid_term_capture(s, ab->param, ab->body, false);
    return e_abs(tag, x, pt, walk(s, body));
  }
  if (auto* ta = term_as<ETAbs>(t)) {
    QualPtr tag = apply_qual(s, ta->tag);
    TypePtr bound = apply_type(s, ta->bound);
    if (s.type_var && ta->var == *s.type_var) return e_tabs(tag, ta->var, bound, ta->body);
    std::string var = ta->var;
    TermPtr body = ta->body;
    if (s.type_var && s.type_repl) {
      FreeVars rfv = free_vars_type(s.type_repl);
      if (rfv.type.count(var)) {
        FreeVars bfv = free_vars(body);
        std::set<std::string> used = rfv.type;
        used.insert(bfv.type.begin(), bfv.type.end());
        used.insert(*s.type_var);
        std::string nv = fresh_name(var, used);
        Subst rename;
        TypePtr nvar = t_var(nv);
        rename.type_var = &var;
        rename.type_repl = nvar;
        body = walk(rename, body);
        var = nv;
      }
    }
    return e_tabs(tag, var, bound, walk(s, body));
  }
  if (auto* qa = term_as<EQAbs>(t)) {
    QualPtr tag = apply_qual(s, qa->tag);
    QualPtr bound = apply_qual(s, qa->bound);
    if (s.qual_var && qa->var == *s.qual_var) return e_qabs(tag, qa->var, bound, qa->body);
    std::string var = qa->var;
    TermPtr body = qa->body;
    if (s.qual_var && s.qual_repl) {
      std::set<std::string> rv = qual_vars(s.qual_repl);
      if (rv.count(var)) {
        FreeVars bfv = free_vars(body);
        std::set<std::string> used = rv;
        used.insert(bfv.qual.begin(), bfv.qual.end());
        used.insert(*s.qual_var);
        std::string nv = fresh_name(var, used);
        Subst rename;
        QualPtr nvar = Qual::var(nv);
        rename.qual_var = &var;
        rename.qual_repl = nvar;
        body = walk(rename, body);
        var = nv;
      }
    }
    return e_qabs(tag, var, bound, walk(s, body));
  }
  if (auto* ap = term_as<EApp>(t)) return e_app(walk(s, ap->fn), walk(s, ap->arg));
  if (auto* tp = term_as<ETApp>(t)) return e_tapp(walk(s, tp->fn), apply_type(s, tp->arg));
  if (auto* qp = term_as<EQApp>(t)) return e_qapp(walk(s, qp->fn), apply_qual(s, qp->arg));
  if (auto* up = term_as<EUpqual>(t)) return e_upqual(apply_qual(s, up->qual), walk(s, up->body));
  if (auto* as = term_as<EAssert>(t)) return e_assert(apply_qual(s, as->qual), walk(s, as->body));
  if (auto* rf = term_as<ERef>(t)) return e_ref(apply_qual(s, rf->tag), walk(s, rf->init));
  if (auto* dr = term_as<EDeref>(t)) return e_deref(walk(s, dr->ref));
  if (auto* asg = term_as<EAssign>(t)) return e_assign(walk(s, asg->target), walk(s, asg->value));
  if (auto* lc = term_as<ELoc>(t)) return e_loc(lc->id, apply_qual(s, lc->tag));
  if (auto* u = term_as<EUnitV>(t)) return e_unit_tagged(apply_qual(s, u->tag));
  if (auto* ca = term_as<ECAbs>(t)) {
    QualPtr tag = apply_qual(s, ca->tag);
    QualType pt = apply_qualtype(s, ca->param_type);
    bool shadows = (s.term_var && ca->param == *s.term_var) || (s.qual_var && ca->param == *s.qual_var);
    if (shadows) return e_cabs(tag, ca->param, pt, ca->body);
    auto [x, body] = avoid_term_capture(s, ca->param, ca->body, true);
    return e_cabs(tag, x, pt, walk(s, body));
  }
  if (auto* cp = term_as<ECApp>(t))
    return e_capp(walk(s, cp->fn), apply_qual(s, cp->qual_arg), walk(s, cp->arg));
  return t;
}

}  // namespace detail

inline TermPtr subst_term(const TermPtr& t, const std::string& x, const TermPtr& v) {
  detail::Subst s;
  s.term_var = &x;
  s.term_repl = v;
  return detail::walk(s, t);
}

inline TermPtr subst_qual_in_term(const TermPtr& t, const std::string& y, const QualPtr& q) {
  detail::Subst s;
  s.qual_var = &y;
  s.qual_repl = q;
  return detail::walk(s, t);
}

inline TermPtr subst_type_in_term(const TermPtr& t, const std::string& X, const TypePtr& S) {
  detail::Subst s;
  s.type_var = &X;
  s.type_repl = S;
  return detail::walk(s, t);
}

// Capture-calculus beta: x -> v in term position and x -> Q in qualifier
// position, in one pass over binders.
inline TermPtr subst_capp(const TermPtr& body, const std::string& x, const TermPtr& v, const QualPtr& q) {
  return subst_qual_in_term(subst_term(body, x, v), x, q);
}

// ---------------------------------------------------------------------------
// Alpha-equivalence.

namespace detail {

struct NameMap {
  std::vector<std::pair<std::string, std::string>> pairs;  // left name -> right name
  bool matches(const std::string& a, const std::string& b) const {
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
      if (it->first == a) return it->second == b;
      if (it->second == b) return false;
    }
    return a == b;
  }
  NameMap push(const std::string& a, const std::string& b) const {
    NameMap m = *this;
    m.pairs.emplace_back(a, b);
    return m;
  }
};

inline bool alpha_qual(const QualPtr& a, const QualPtr& b, const NameMap& qm) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case QualKind::Top:
    case QualKind::Bot:
      return true;
    case QualKind::Const:
      return a->name == b->name;
    case QualKind::Var:
      return qm.matches(a->name, b->name);
    case QualKind::Join:
    case QualKind::Meet:
      return alpha_qual(a->lhs, b->lhs, qm) && alpha_qual(a->rhs, b->rhs, qm);
  }
  return false;
}

bool alpha_type(const TypePtr& a, const TypePtr& b, const NameMap& tm, const NameMap& qm);

inline bool alpha_qualtype(const QualType& a, const QualType& b, const NameMap& tm, const NameMap& qm) {
  return alpha_qual(a.qual, b.qual, qm) && alpha_type(a.shape, b.shape, tm, qm);
}

inline bool alpha_type(const TypePtr& a, const TypePtr& b, const NameMap& tm, const NameMap& qm) {
  if (a->node.index() != b->node.index()) return false;
  if (type_as<TTop>(a) || type_as<TUnit>(a)) return true;
  if (auto* v = type_as<TVar>(a)) return tm.matches(v->name, type_as<TVar>(b)->name);
  if (auto* ar = type_as<TArrow>(a)) {
    auto* br = type_as<TArrow>(b);
    return alpha_qualtype(ar->param, br->param, tm, qm) && alpha_qualtype(ar->result, br->result, tm, qm);
  }
  if (auto* al = type_as<TAll>(a)) {
    auto* bl = type_as<TAll>(b);
    return alpha_type(al->bound, bl->bound, tm, qm) &&
           alpha_qualtype(al->body, bl->body, tm.push(al->var, bl->var), qm);
  }
  if (auto* aq = type_as<TQAll>(a)) {
    auto* bq = type_as<TQAll>(b);
    return alpha_qual(aq->bound, bq->bound, qm) &&
           alpha_qualtype(aq->body, bq->body, tm, qm.push(aq->var, bq->var));
  }
  if (auto* ab = type_as<TBox>(a)) return alpha_qualtype(ab->content, type_as<TBox>(b)->content, tm, qm);
  if (auto* ad = type_as<TDepArrow>(a)) {
    auto* bd = type_as<TDepArrow>(b);
    return alpha_qualtype(ad->param, bd->param, tm, qm) &&
           alpha_qualtype(ad->result, bd->result, tm, qm.push(ad->var, bd->var));
  }
  return false;
}

inline bool alpha_term(const TermPtr& a, const TermPtr& b, const NameMap& em, const NameMap& tm,
                       const NameMap& qm) {
  if (a->node.index() != b->node.index()) return false;
  if (auto* v = term_as<EVar>(a)) return em.matches(v->name, term_as<EVar>(b)->name);
  if (auto* ab = term_as<EAbs>(a)) {
    auto* bb = term_as<EAbs>(b);
    return alpha_qual(ab->tag, bb->tag, qm) && alpha_qualtype(ab->param_type, bb->param_type, tm, qm) &&
           alpha_term(ab->body, bb->body, em.push(ab->param, bb->param), tm, qm);
  }
  if (auto* at = term_as<ETAbs>(a)) {
    auto* bt = term_as<ETAbs>(b);
    return alpha_qual(at->tag, bt->tag, qm) && alpha_type(at->bound, bt->bound, tm, qm) &&
           alpha_term(at->body, bt->body, em, tm.push(at->var, bt->var), qm);
  }
  if (auto* aq = term_as<EQAbs>(a)) {
    auto* bq = term_as<EQAbs>(b);
    return alpha_qual(aq->tag, bq->tag, qm) && alpha_qual(aq->bound, bq->bound, qm) &&
           alpha_term(aq->body, bq->body, em, tm, qm.push(aq->var, bq->var));
  }
  if (auto* ap = term_as<EApp>(a)) {
    auto* bp = term_as<EApp>(b);
    return alpha_term(ap->fn, bp->fn, em, tm, qm) && alpha_term(ap->arg, bp->arg, em, tm, qm);
  }
  if (auto* atp = term_as<ETApp>(a)) {
    auto* btp = term_as<ETApp>(b);
    return alpha_term(atp->fn, btp->fn, em, tm, qm) && alpha_type(atp->arg, btp->arg, tm, qm);
  }
  if (auto* aqp = term_as<EQApp>(a)) {
    auto* bqp = term_as<EQApp>(b);
    return alpha_term(aqp->fn, bqp->fn, em, tm, qm) && alpha_qual(aqp->arg, bqp->arg, qm);
  }
  if (auto* au = term_as<EUpqual>(a)) {
    auto* bu = term_as<EUpqual>(b);
    return alpha_qual(au->qual, bu->qual, qm) && alpha_term(au->body, bu->body, em, tm, qm);
  }
  if (auto* aa = term_as<EAssert>(a)) {
    auto* ba = term_as<EAssert>(b);
    return alpha_qual(aa->qual, ba->qual, qm) && alpha_term(aa->body, ba->body, em, tm, qm);
  }
  if (auto* ar = term_as<ERef>(a)) {
    auto* br = term_as<ERef>(b);
    return alpha_qual(ar->tag, br->tag, qm) && alpha_term(ar->init, br->init, em, tm, qm);
  }
  if (auto* ad = term_as<EDeref>(a)) return alpha_term(ad->ref, term_as<EDeref>(b)->ref, em, tm, qm);
  if (auto* ag = term_as<EAssign>(a)) {
    auto* bg = term_as<EAssign>(b);
    return alpha_term(ag->target, bg->target, em, tm, qm) && alpha_term(ag->value, bg->value, em, tm, qm);
  }
  if (auto* al = term_as<ELoc>(a))
    return al->id == term_as<ELoc>(b)->id && alpha_qual(al->tag, term_as<ELoc>(b)->tag, qm);
  if (auto* un = term_as<EUnitV>(a)) return alpha_qual(un->tag, term_as<EUnitV>(b)->tag, qm);
  if (auto* ac = term_as<ECAbs>(a)) {
    auto* bc = term_as<ECAbs>(b);
    return alpha_qual(ac->tag, bc->tag, qm) && alpha_qualtype(ac->param_type, bc->param_type, tm, qm) &&
           alpha_term(ac->body, bc->body, em.push(ac->param, bc->param), tm,
                      qm.push(ac->param, bc->param));
  }
  if (auto* acp = term_as<ECApp>(a)) {
    auto* bcp = term_as<ECApp>(b);
    return alpha_term(acp->fn, bcp->fn, em, tm, qm) && alpha_qual(acp->qual_arg, bcp->qual_arg, qm) &&
           alpha_term(acp->arg, bcp->arg, em, tm, qm);
  }
  return false;
}

}  // namespace detail

inline bool alpha_eq_type(const TypePtr& a, const TypePtr& b) {
  return detail::alpha_type(a, b, {}, {});
}
inline bool alpha_eq_qualtype(const QualType& a, const QualType& b) {
  return detail::alpha_qualtype(a, b, {}, {});
}
inline bool alpha_eq_term(const TermPtr& a, const TermPtr& b) {
  return detail::alpha_term(a, b, {}, {}, {});
}

}  // namespace fq

#endif  // FQ_AST_HPP
