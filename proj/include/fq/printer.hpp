#ifndef FQ_PRINTER_HPP
#define FQ_PRINTER_HPP

#include <sstream>
#include <string>

#include "fq/ast.hpp"
#include "fq/subqual.hpp"

namespace fq {

// ---------------------------------------------------------------------------
// Qualifier formulas.  Precedence: atoms 2, /\ 1, \/ 0; left associative, so
// right-nested occurrences of the same operator keep their parentheses and
// printing round-trips to a structurally equal formula.

namespace detail {

inline void print_qual_prec(std::ostream& os, const QualPtr& q, int min_level) {
  switch (q->kind) {
    case QualKind::Top:
      os << "top";
      return;
    case QualKind::Bot:
      os << "bot";
      return;
    case QualKind::Const:
      os << '`' << q->name;
      return;
    case QualKind::Var:
      os << q->name;
      return;
    case QualKind::Join: {
      bool paren = min_level > 0;
      if (paren) os << '(';
      print_qual_prec(os, q->lhs, 0);
      os << " \\/ ";
      print_qual_prec(os, q->rhs, 1);
      if (paren) os << ')';
      return;
    }
    case QualKind::Meet: {
      bool paren = min_level > 1;
      if (paren) os << '(';
      print_qual_prec(os, q->lhs, 1);
      os << " /\\ ";
      print_qual_prec(os, q->rhs, 2);
      if (paren) os << ')';
      return;
    }
  }
}

}  // namespace detail

inline std::string print_qual(const QualPtr& q) {
  std::ostringstream os;
  detail::print_qual_prec(os, q, 0);
  return os.str();
}

inline std::string print_qual_atom(const QualPtr& q) {
  std::ostringstream os;
  detail::print_qual_prec(os, q, 2);
  return os.str();
}

// ---------------------------------------------------------------------------
// Types.

namespace detail {

void print_stype(std::ostream& os, const TypePtr& t, bool atom_position);

inline void print_qualtype_inner(std::ostream& os, const QualType& t) {
  os << '{' << print_qual(t.qual) << "} ";
  print_stype(os, t.shape, true);
}

inline void print_stype(std::ostream& os, const TypePtr& t, bool atom_position) {
  if (type_as<TTop>(t)) {
    os << "Top";
  } else if (type_as<TUnit>(t)) {
    os << "Unit";
  } else if (auto* v = type_as<TVar>(t)) {
    os << v->name;
  } else if (auto* bx = type_as<TBox>(t)) {
    os << "Box ";
    print_qualtype_inner(os, bx->content);
  } else if (auto* a = type_as<TArrow>(t)) {
    if (atom_position) os << '(';
    print_qualtype_inner(os, a->param);
    os << " -> ";
    print_qualtype_inner(os, a->result);
    if (atom_position) os << ')';
  } else if (auto* al = type_as<TAll>(t)) {
    os << "all (" << al->var << " <: ";
    print_stype(os, al->bound, false);
    os << ") . ";
    print_qualtype_inner(os, al->body);
  } else if (auto* qa = type_as<TQAll>(t)) {
    os << "qall (" << qa->var << " <: " << print_qual(qa->bound) << ") . ";
    print_qualtype_inner(os, qa->body);
  } else if (auto* d = type_as<TDepArrow>(t)) {
    if (atom_position) os << '(';
    os << '(' << d->var << " <: " << print_qual(d->param.qual) << " : ";
    print_stype(os, d->param.shape, false);
    os << ") -> ";
    print_qualtype_inner(os, d->result);
    if (atom_position) os << ')';
  }
}

}  // namespace detail

inline std::string print_type(const TypePtr& t) {
  std::ostringstream os;
  detail::print_stype(os, t, false);
  return os.str();
}

inline std::string print_qualtype(const QualType& t) {
  std::ostringstream os;
  detail::print_qualtype_inner(os, t);
  return os.str();
}

// ---------------------------------------------------------------------------
// Terms.  Levels: 0 lambda/assign bodies, 1 assign operands (application),
// 2 prefix-form arguments (postfix), 3 atoms.

namespace detail {

inline void print_term_prec(std::ostream& os, const TermPtr& t, int min_level) {
  auto paren_if = [&](bool p, auto&& f) {
    if (p) os << '(';
    f();
    if (p) os << ')';
  };
  if (auto* v = term_as<EVar>(t)) {
    os << v->name;
  } else if (auto* u = term_as<EUnitV>(t)) {
    if (u->tag->kind == QualKind::Bot)
      os << "unit";
    else
      os << "unit[" << print_qual(u->tag) << ']';
  } else if (auto* l = term_as<ELoc>(t)) {
    os << "loc[" << print_qual(l->tag) << "]#" << l->id;
  } else if (auto* ab = term_as<EAbs>(t)) {
    paren_if(min_level > 0, [&] {
      os << "fn[" << print_qual(ab->tag) << "](" << ab->param << ": " << print_qualtype(ab->param_type)
         << ") => ";
      print_term_prec(os, ab->body, 0);
    });
  } else if (auto* ca = term_as<ECAbs>(t)) {
    paren_if(min_level > 0, [&] {
      os << "fn[" << print_qual(ca->tag) << "](" << ca->param << " <: " << print_qual(ca->param_type.qual)
         << " : " << print_type(ca->param_type.shape) << ") => ";
      print_term_prec(os, ca->body, 0);
    });
  } else if (auto* ta = term_as<ETAbs>(t)) {
    paren_if(min_level > 0, [&] {
      os << "tfn[" << print_qual(ta->tag) << "](" << ta->var << " <: " << print_type(ta->bound) << ") => ";
      print_term_prec(os, ta->body, 0);
    });
  } else if (auto* qa = term_as<EQAbs>(t)) {
    paren_if(min_level > 0, [&] {
      os << "qfn[" << print_qual(qa->tag) << "](" << qa->var << " <: " << print_qual(qa->bound) << ") => ";
      print_term_prec(os, qa->body, 0);
    });
  } else if (auto* ap = term_as<EApp>(t)) {
    paren_if(min_level > 1, [&] {
      print_term_prec(os, ap->fn, 1);
      os << ' ';
      print_term_prec(os, ap->arg, 2);
    });
  } else if (auto* tp = term_as<ETApp>(t)) {
    paren_if(min_level > 2, [&] {
      print_term_prec(os, tp->fn, 2);
      os << " [" << print_type(tp->arg) << ']';
    });
  } else if (auto* qp = term_as<EQApp>(t)) {
    paren_if(min_level > 2, [&] {
      print_term_prec(os, qp->fn, 2);
      os << " [{" << print_qual(qp->arg) << "}]";
    });
  } else if (auto* cp = term_as<ECApp>(t)) {
    paren_if(min_level > 2, [&] {
      print_term_prec(os, cp->fn, 2);
      os << " [{" << print_qual(cp->qual_arg) << "}] ";
      print_term_prec(os, cp->arg, 3);
    });
  } else if (auto* up = term_as<EUpqual>(t)) {
    paren_if(min_level > 1, [&] {
      os << "upqual " << print_qual_atom(up->qual) << ' ';
      print_term_prec(os, up->body, 2);
    });
  } else if (auto* as = term_as<EAssert>(t)) {
    paren_if(min_level > 1, [&] {
      os << "assert " << print_qual_atom(as->qual) << ' ';
      print_term_prec(os, as->body, 2);
    });
  } else if (auto* rf = term_as<ERef>(t)) {
    paren_if(min_level > 1, [&] {
      os << "ref[" << print_qual(rf->tag) << "] ";
      print_term_prec(os, rf->init, 2);
    });
  } else if (auto* dr = term_as<EDeref>(t)) {
    os << '!';
    print_term_prec(os, dr->ref, 3);
  } else if (auto* asg = term_as<EAssign>(t)) {
    paren_if(min_level > 0, [&] {
      print_term_prec(os, asg->target, 1);
      os << " := ";
      print_term_prec(os, asg->value, 1);
    });
  }
}

}  // namespace detail

inline std::string print_term(const TermPtr& t) {
  std::ostringstream os;
  detail::print_term_prec(os, t, 0);
  return os.str();
}

// ---------------------------------------------------------------------------
// Derivations.

inline void print_subqual_deriv(std::ostream& os, const SqDerivPtr& d, int indent = 0) {
  os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << d->rule << ": " << print_qual(d->lhs)
     << " <: " << print_qual(d->rhs) << '\n';
  for (const auto& p : d->premises) print_subqual_deriv(os, p, indent + 1);
}

inline std::string print_subqual_deriv(const SqDerivPtr& d) {
  std::ostringstream os;
  print_subqual_deriv(os, d, 0);
  return os.str();
}

}  // namespace fq

#endif  // FQ_PRINTER_HPP
