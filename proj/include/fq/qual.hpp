#ifndef FQ_QUAL_HPP
#define FQ_QUAL_HPP

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fq {

// Qualifier formulas: lattice terms built from top/bot, base-lattice
// constants, qualifier variables, and textual meets/joins.
enum class QualKind { Top, Bot, Const, Var, Join, Meet };

class Qual;
using QualPtr = std::shared_ptr<const Qual>;

class Qual {
 public:
  QualKind kind;
  std::string name;  // Const: element label; Var: variable name
  QualPtr lhs, rhs;  // Join/Meet children

  static QualPtr top() {
    static const QualPtr t = std::make_shared<Qual>(Qual{QualKind::Top, "", nullptr, nullptr});
    return t;
  }
  static QualPtr bot() {
    static const QualPtr b = std::make_shared<Qual>(Qual{QualKind::Bot, "", nullptr, nullptr});
    return b;
  }
  static QualPtr cst(std::string label) {
    return std::make_shared<Qual>(Qual{QualKind::Const, std::move(label), nullptr, nullptr});
  }
  static QualPtr var(std::string name) {
    return std::make_shared<Qual>(Qual{QualKind::Var, std::move(name), nullptr, nullptr});
  }
  static QualPtr join(QualPtr a, QualPtr b) {
    return std::make_shared<Qual>(Qual{QualKind::Join, "", std::move(a), std::move(b)});
  }
  static QualPtr meet(QualPtr a, QualPtr b) {
    return std::make_shared<Qual>(Qual{QualKind::Meet, "", std::move(a), std::move(b)});
  }
};

inline bool qual_eq(const QualPtr& a, const QualPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case QualKind::Top:
    case QualKind::Bot:
      return true;
    case QualKind::Const:
    case QualKind::Var:
      return a->name == b->name;
    case QualKind::Join:
    case QualKind::Meet:
      return qual_eq(a->lhs, b->lhs) && qual_eq(a->rhs, b->rhs);
  }
  return false;
}

inline bool qual_is_ground(const QualPtr& q) {
  switch (q->kind) {
    case QualKind::Var:
      return false;
    case QualKind::Join:
    case QualKind::Meet:
      return qual_is_ground(q->lhs) && qual_is_ground(q->rhs);
    default:
      return true;
  }
}

inline void collect_qual_vars(const QualPtr& q, std::set<std::string>& out) {
  switch (q->kind) {
    case QualKind::Var:
      out.insert(q->name);
      break;
    case QualKind::Join:
    case QualKind::Meet:
      collect_qual_vars(q->lhs, out);
      collect_qual_vars(q->rhs, out);
      break;
    default:
      break;
  }
}

inline std::set<std::string> qual_vars(const QualPtr& q) {
  std::set<std::string> out;
  collect_qual_vars(q, out);
  return out;
}

// Plain replacement; qualifier formulas have no binders.
inline QualPtr subst_qual(const QualPtr& q, const std::string& x, const QualPtr& r) {
  switch (q->kind) {
    case QualKind::Var:
      return q->name == x ? r : q;
    case QualKind::Join: {
      QualPtr l = subst_qual(q->lhs, x, r), rr = subst_qual(q->rhs, x, r);
      if (l == q->lhs && rr == q->rhs) return q;
      return Qual::join(l, rr);
    }
    case QualKind::Meet: {
      QualPtr l = subst_qual(q->lhs, x, r), rr = subst_qual(q->rhs, x, r);
      if (l == q->lhs && rr == q->rhs) return q;
      return Qual::meet(l, rr);
    }
    default:
      return q;
  }
}

// Canonical serialization, used as a map key by the subqualification memo
// tables and the generators.
inline std::string qual_key(const QualPtr& q) {
  switch (q->kind) {
    case QualKind::Top:
      return "T";
    case QualKind::Bot:
      return "B";
    case QualKind::Const:
      return "C:" + q->name;
    case QualKind::Var:
      return "V:" + q->name;
    case QualKind::Join:
      return "J(" + qual_key(q->lhs) + "," + qual_key(q->rhs) + ")";
    case QualKind::Meet:
      return "M(" + qual_key(q->lhs) + "," + qual_key(q->rhs) + ")";
  }
  return "?";
}

inline int qual_size(const QualPtr& q) {
  switch (q->kind) {
    case QualKind::Join:
    case QualKind::Meet:
      return 1 + qual_size(q->lhs) + qual_size(q->rhs);
    default:
      return 1;
  }
}

// Left-assoc join of a name list; bot for the empty list.  Used for the
// free-variable joins of the capture calculus.
inline QualPtr join_of_vars(const std::vector<std::string>& names) {
  if (names.empty()) return Qual::bot();
  QualPtr acc = Qual::var(names.front());
  for (std::size_t i = 1; i < names.size(); ++i) acc = Qual::join(acc, Qual::var(names[i]));
  return acc;
}

}  // namespace fq

#endif  // FQ_QUAL_HPP
