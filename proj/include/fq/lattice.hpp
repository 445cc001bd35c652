#ifndef FQ_LATTICE_HPP
#define FQ_LATTICE_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fq/qual.hpp"

namespace fq {

enum class LatticeErrorKind {
  NotAPartialOrder,
  NoMeetOrJoin,
  Unbounded,
  DuplicateLabel,
  UnknownElement,
  BadFile,
};

struct LatticeError : std::runtime_error {
  LatticeErrorKind kind;
  LatticeError(LatticeErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// A lattice given by its Hasse diagram.  The order is the reflexive
// transitive closure of the edges; top and bottom are inferred.
struct LatticeSpec {
  std::string name;
  std::vector<std::string> elements;
  std::vector<std::pair<std::string, std::string>> hasse_edges;  // (lower, upper)
};

class FiniteLattice {
 public:
  FiniteLattice() = default;

  const std::string& name() const { return name_; }
  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  bool has(const std::string& label) const { return index_.count(label) != 0; }

  int index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end())
      throw LatticeError(LatticeErrorKind::UnknownElement,
                         "unknown lattice element '" + label + "' in lattice " + name_);
    return it->second;
  }
  const std::string& label_of(int i) const { return labels_.at(static_cast<std::size_t>(i)); }

  bool leq(int a, int b) const { return leq_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
  int join(int a, int b) const { return join_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
  int meet(int a, int b) const { return meet_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }

  bool leq(const std::string& a, const std::string& b) const { return leq(index_of(a), index_of(b)); }
  std::string join(const std::string& a, const std::string& b) const {
    return label_of(join(index_of(a), index_of(b)));
  }
  std::string meet(const std::string& a, const std::string& b) const {
    return label_of(meet(index_of(a), index_of(b)));
  }

  int top_index() const { return top_; }
  int bottom_index() const { return bottom_; }
  const std::string& top_label() const { return label_of(top_); }
  const std::string& bottom_label() const { return label_of(bottom_); }

  // Builds a lattice from a full order relation, checking the lattice laws.
  static FiniteLattice from_order(std::string name, std::vector<std::string> labels,
                                  std::vector<std::vector<bool>> leq) {
    FiniteLattice L;
    L.name_ = std::move(name);
    L.labels_ = std::move(labels);
    for (std::size_t i = 0; i < L.labels_.size(); ++i) {
      if (!L.index_.emplace(L.labels_[i], static_cast<int>(i)).second)
        throw LatticeError(LatticeErrorKind::DuplicateLabel,
                           "duplicate element label '" + L.labels_[i] + "'");
    }
    L.leq_ = std::move(leq);
    const int n = L.size();
    for (int a = 0; a < n; ++a) {
      if (!L.leq(a, a))
        throw LatticeError(LatticeErrorKind::NotAPartialOrder, "order is not reflexive");
      for (int b = 0; b < n; ++b)
        if (a != b && L.leq(a, b) && L.leq(b, a))
          throw LatticeError(LatticeErrorKind::NotAPartialOrder,
                             "cycle through '" + L.labels_[static_cast<std::size_t>(a)] + "' and '" +
                                 L.labels_[static_cast<std::size_t>(b)] + "'");
    }
    L.join_.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), -1));
    L.meet_.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), -1));
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        L.join_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = L.bound_of(a, b, true);
        L.meet_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = L.bound_of(a, b, false);
      }
    }
    L.top_ = L.bottom_ = -1;
    for (int c = 0; c < n; ++c) {
      bool is_top = true, is_bot = true;
      for (int x = 0; x < n; ++x) {
        is_top = is_top && L.leq(x, c);
        is_bot = is_bot && L.leq(c, x);
      }
      if (is_top) L.top_ = c;
      if (is_bot) L.bottom_ = c;
    }
    if (L.top_ < 0 || L.bottom_ < 0)
      throw LatticeError(LatticeErrorKind::Unbounded, "lattice has no global top or bottom");
    return L;
  }

 private:
  // Least upper bound (want_join) or greatest lower bound of a and b; throws
  // NoMeetOrJoin when the pair has none.
  int bound_of(int a, int b, bool want_join) const {
    const int n = size();
    std::vector<int> cands;
    for (int c = 0; c < n; ++c) {
      bool ok = want_join ? (leq(a, c) && leq(b, c)) : (leq(c, a) && leq(c, b));
      if (ok) cands.push_back(c);
    }
    for (int c : cands) {
      bool best = true;
      for (int d : cands) best = best && (want_join ? leq(c, d) : leq(d, c));
      if (best) return c;
    }
    throw LatticeError(LatticeErrorKind::NoMeetOrJoin,
                       std::string(want_join ? "no join" : "no meet") + " for '" +
                           labels_[static_cast<std::size_t>(a)] + "' and '" +
                           labels_[static_cast<std::size_t>(b)] + "'");
  }

  std::string name_;
  std::vector<std::string> labels_;
  std::map<std::string, int> index_;
  std::vector<std::vector<bool>> leq_;
  std::vector<std::vector<int>> join_, meet_;
  int top_ = -1, bottom_ = -1;
};

inline FiniteLattice validate_lattice(const LatticeSpec& spec) {
  std::map<std::string, int> idx;
  for (std::size_t i = 0; i < spec.elements.size(); ++i) {
    if (!idx.emplace(spec.elements[i], static_cast<int>(i)).second)
      throw LatticeError(LatticeErrorKind::DuplicateLabel,
                         "duplicate element label '" + spec.elements[i] + "'");
  }
  const int n = static_cast<int>(spec.elements.size());
  if (n == 0) throw LatticeError(LatticeErrorKind::Unbounded, "empty element list");
  std::vector<std::vector<bool>> leq(static_cast<std::size_t>(n),
                                     std::vector<bool>(static_cast<std::size_t>(n), false));
  for (int i = 0; i < n; ++i) leq[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = true;
  for (const auto& [lo, hi] : spec.hasse_edges) {
    auto li = idx.find(lo), hi_it = idx.find(hi);
    if (li == idx.end() || hi_it == idx.end())
      throw LatticeError(LatticeErrorKind::UnknownElement,
                         "edge references undeclared element '" + (li == idx.end() ? lo : hi) + "'");
    if (lo == hi)
      throw LatticeError(LatticeErrorKind::NotAPartialOrder, "self-edge on '" + lo + "'");
    leq[static_cast<std::size_t>(li->second)][static_cast<std::size_t>(hi_it->second)] = true;
  }
  // Reflexive-transitive closure.
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      if (leq[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)])
        for (int b = 0; b < n; ++b)
          if (leq[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)])
            leq[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
  return FiniteLattice::from_order(spec.name, spec.elements, std::move(leq));
}

// ---------------------------------------------------------------------------
// Catalog lattices used by the oracle.

inline FiniteLattice make_chain(const std::string& name, const std::vector<std::string>& labels) {
  LatticeSpec s{name, labels, {}};
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) s.hasse_edges.emplace_back(labels[i], labels[i + 1]);
  return validate_lattice(s);
}

// The default base lattice of the kernel calculus.
inline const FiniteLattice& two_point() {
  static const FiniteLattice L = make_chain("two_point", {"bot", "top"});
  return L;
}

inline FiniteLattice diamond_m3() {
  return validate_lattice(
      {"m3", {"0", "a", "b", "c", "1"}, {{"0", "a"}, {"0", "b"}, {"0", "c"}, {"a", "1"}, {"b", "1"}, {"c", "1"}}});
}

inline FiniteLattice pentagon_n5() {
  return validate_lattice(
      {"n5", {"0", "a", "b", "c", "1"}, {{"0", "a"}, {"a", "c"}, {"c", "1"}, {"0", "b"}, {"b", "1"}}});
}

inline FiniteLattice boolean_square() {
  return validate_lattice({"square", {"0", "p", "q", "1"}, {{"0", "p"}, {"0", "q"}, {"p", "1"}, {"q", "1"}}});
}

inline std::vector<FiniteLattice> catalog_small_lattices() {
  std::vector<FiniteLattice> out;
  out.push_back(make_chain("two_chain", {"0", "1"}));
  out.push_back(make_chain("three_chain", {"0", "m", "1"}));
  out.push_back(make_chain("four_chain", {"0", "p", "q", "1"}));
  out.push_back(diamond_m3());
  out.push_back(pentagon_n5());
  out.push_back(boolean_square());
  return out;
}

// Componentwise product; labels are "(a,b)".
inline FiniteLattice product(const FiniteLattice& A, const FiniteLattice& B) {
  std::vector<std::string> labels;
  for (int a = 0; a < A.size(); ++a)
    for (int b = 0; b < B.size(); ++b) labels.push_back("(" + A.label_of(a) + "," + B.label_of(b) + ")");
  const int n = A.size() * B.size();
  std::vector<std::vector<bool>> leq(static_cast<std::size_t>(n),
                                     std::vector<bool>(static_cast<std::size_t>(n), false));
  for (int a1 = 0; a1 < A.size(); ++a1)
    for (int b1 = 0; b1 < B.size(); ++b1)
      for (int a2 = 0; a2 < A.size(); ++a2)
        for (int b2 = 0; b2 < B.size(); ++b2)
          leq[static_cast<std::size_t>(a1 * B.size() + b1)][static_cast<std::size_t>(a2 * B.size() + b2)] =
              A.leq(a1, a2) && B.leq(b1, b2);
  return FiniteLattice::from_order(A.name() + "x" + B.name(), std::move(labels), std::move(leq));
}

// Horizontal sum: B's interior is glued between A's bounds, incomparable to
// A's interior.  A embeds by identity, preserving top and bottom.
inline FiniteLattice horizontal_sum(const FiniteLattice& A, const FiniteLattice& B) {
  std::vector<std::string> labels = A.labels();
  std::vector<int> b_inner;  // indices in B
  for (int b = 0; b < B.size(); ++b)
    if (b != B.top_index() && b != B.bottom_index()) {
      b_inner.push_back(b);
      labels.push_back("+" + B.label_of(b));
    }
  const int na = A.size();
  const int n = na + static_cast<int>(b_inner.size());
  std::vector<std::vector<bool>> leq(static_cast<std::size_t>(n),
                                     std::vector<bool>(static_cast<std::size_t>(n), false));
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j)
      leq[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = A.leq(i, j);
  for (std::size_t i = 0; i < b_inner.size(); ++i) {
    const int bi = na + static_cast<int>(i);
    leq[static_cast<std::size_t>(bi)][static_cast<std::size_t>(bi)] = true;
    leq[static_cast<std::size_t>(A.bottom_index())][static_cast<std::size_t>(bi)] = true;
    leq[static_cast<std::size_t>(bi)][static_cast<std::size_t>(A.top_index())] = true;
    for (std::size_t j = 0; j < b_inner.size(); ++j)
      if (B.leq(b_inner[i], b_inner[j]))
        leq[static_cast<std::size_t>(bi)][static_cast<std::size_t>(na + static_cast<int>(j))] = true;
  }
  return FiniteLattice::from_order(A.name() + "||" + B.name(), std::move(labels), std::move(leq));
}

// ---------------------------------------------------------------------------
// Ground evaluation of qualifier formulas over a base lattice.

// Returns the element index, or nullopt when the formula has variables.
inline std::optional<int> eval_ground(const FiniteLattice& L, const QualPtr& q) {
  switch (q->kind) {
    case QualKind::Top:
      return L.top_index();
    case QualKind::Bot:
      return L.bottom_index();
    case QualKind::Const:
      return L.index_of(q->name);
    case QualKind::Var:
      return std::nullopt;
    case QualKind::Join: {
      auto l = eval_ground(L, q->lhs), r = eval_ground(L, q->rhs);
      if (!l || !r) return std::nullopt;
      return L.join(*l, *r);
    }
    case QualKind::Meet: {
      auto l = eval_ground(L, q->lhs), r = eval_ground(L, q->rhs);
      if (!l || !r) return std::nullopt;
      return L.meet(*l, *r);
    }
  }
  return std::nullopt;
}

inline QualPtr canonical_const(const FiniteLattice& L, int elem) {
  if (elem == L.top_index()) return Qual::top();
  if (elem == L.bottom_index()) return Qual::bot();
  return Qual::cst(L.label_of(elem));
}

// Collapses ground content to its evaluation.  Join and meet spines are
// flattened first, so ground leaves separated by variables still combine
// (a v X v b collapses its a,b part); reassociation is derivable in the free
// lattice, so equivalence is preserved.  The result has no ground subterm
// under a join or meet, top/bottom elements print as top/bot, and the
// function is idempotent.
QualPtr normalize(const FiniteLattice& L, const QualPtr& q);

namespace lattice_detail {

inline void flatten(QualKind op, const FiniteLattice& L, const QualPtr& q, std::vector<QualPtr>& leaves) {
  if (q->kind == op) {
    flatten(op, L, q->lhs, leaves);
    flatten(op, L, q->rhs, leaves);
  } else {
    leaves.push_back(normalize(L, q));
  }
}

inline QualPtr rebuild_spine(QualKind op, const FiniteLattice& L, const std::vector<QualPtr>& leaves) {
  const bool joining = op == QualKind::Join;
  int ground_acc = joining ? L.bottom_index() : L.top_index();
  bool has_ground = false;
  std::vector<QualPtr> rest;
  for (const QualPtr& leaf : leaves) {
    if (auto e = eval_ground(L, leaf)) {
      ground_acc = joining ? L.join(ground_acc, *e) : L.meet(ground_acc, *e);
      has_ground = true;
    } else {
      rest.push_back(leaf);
    }
  }
  // An absorbing ground part swallows the whole spine.
  if (has_ground && ground_acc == (joining ? L.top_index() : L.bottom_index()))
    return canonical_const(L, ground_acc);
  std::vector<QualPtr> out;
  if (has_ground) out.push_back(canonical_const(L, ground_acc));
  out.insert(out.end(), rest.begin(), rest.end());
  if (out.empty()) return canonical_const(L, ground_acc);
  QualPtr acc = out.front();
  for (std::size_t i = 1; i < out.size(); ++i)
    acc = joining ? Qual::join(acc, out[i]) : Qual::meet(acc, out[i]);
  return acc;
}

}  // namespace lattice_detail

inline QualPtr normalize(const FiniteLattice& L, const QualPtr& q) {
  if (auto e = eval_ground(L, q)) return canonical_const(L, *e);
  switch (q->kind) {
    case QualKind::Join:
    case QualKind::Meet: {
      std::vector<QualPtr> leaves;
      lattice_detail::flatten(q->kind, L, q, leaves);
      QualPtr out = lattice_detail::rebuild_spine(q->kind, L, leaves);
      return qual_eq(out, q) ? q : out;
    }
    default:
      return q;
  }
}

}  // namespace fq

#endif  // FQ_LATTICE_HPP
