#ifndef FQ_ORACLE_HPP
#define FQ_ORACLE_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fq/capture.hpp"
#include "fq/colours.hpp"
#include "fq/eval.hpp"
#include "fq/printer.hpp"
#include "fq/refs.hpp"
#include "fq/subqual.hpp"
#include "fq/typecheck.hpp"

namespace fq {

// ---------------------------------------------------------------------------
// Deterministic rng helper shared by the generators.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  int below(int n) { return n <= 0 ? 0 : static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }
  bool chance(int pct) { return below(100) < pct; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(below(static_cast<int>(v.size())))];
  }
  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// Test lattices: a target lattice together with the embedding of the base.

struct TestLattice {
  FiniteLattice L;
  std::map<std::string, std::string> embed;  // base label -> target label
};

inline TestLattice identity_extension(const FiniteLattice& M) {
  TestLattice t{M, {}};
  for (const auto& l : M.labels()) t.embed[l] = l;
  return t;
}

// Counterexamples report from the smallest lattice first, so results are
// minimal and stable.
inline void sort_by_size(std::vector<TestLattice>& ls) {
  std::stable_sort(ls.begin(), ls.end(),
                   [](const TestLattice& a, const TestLattice& b) { return a.L.size() < b.L.size(); });
}

// Two-point mode: the two-point base embeds bound-preservingly into every
// bounded lattice, so the whole catalog serves as the instantiation targets.
inline std::vector<TestLattice> two_point_extension_lattices() {
  std::vector<TestLattice> out;
  for (FiniteLattice& L : catalog_small_lattices()) {
    TestLattice t{std::move(L), {}};
    t.embed["bot"] = t.L.bottom_label();
    t.embed["top"] = t.L.top_label();
    out.push_back(std::move(t));
  }
  sort_by_size(out);
  return out;
}

// Extended-base mode: the base itself, products M x C embedded by l -> (l, bot)
// (sound; instantiations stay inside the embedded copy), and horizontal sums
// M || C whose identity embedding preserves the bounds, so variables can
// leave the embedded copy.
inline std::vector<TestLattice> extension_lattices(const FiniteLattice& M, int max_size = 32) {
  std::vector<TestLattice> out;
  out.push_back(identity_extension(M));
  std::vector<FiniteLattice> catalog = catalog_small_lattices();
  for (const FiniteLattice& C : catalog) {
    if (M.size() * C.size() <= max_size) {
      TestLattice t{product(M, C), {}};
      for (const auto& l : M.labels()) t.embed[l] = "(" + l + "," + C.bottom_label() + ")";
      out.push_back(std::move(t));
    }
  }
  for (const FiniteLattice& C : catalog) {
    if (C.size() <= 2) continue;  // no interior
    if (M.size() + C.size() - 2 > max_size) continue;
    TestLattice t{horizontal_sum(M, C), {}};
    for (const auto& l : M.labels()) t.embed[l] = l;
    out.push_back(std::move(t));
  }
  sort_by_size(out);
  return out;
}

// ---------------------------------------------------------------------------
// Instantiation enumeration and evaluation under an embedding.

using Instantiation = std::map<std::string, int>;  // variable -> element index in the target

inline std::optional<int> eval_in(const TestLattice& T, const Instantiation& inst, const QualPtr& q) {
  switch (q->kind) {
    case QualKind::Top:
      return T.L.index_of(T.embed.at(two_point().top_label()));
    case QualKind::Bot:
      return T.L.index_of(T.embed.at(two_point().bottom_label()));
    case QualKind::Const: {
      auto it = T.embed.find(q->name);
      if (it == T.embed.end()) return std::nullopt;
      return T.L.index_of(it->second);
    }
    case QualKind::Var: {
      auto it = inst.find(q->name);
      if (it == inst.end()) return std::nullopt;
      return it->second;
    }
    case QualKind::Join: {
      auto l = eval_in(T, inst, q->lhs), r = eval_in(T, inst, q->rhs);
      if (!l || !r) return std::nullopt;
      return T.L.join(*l, *r);
    }
    case QualKind::Meet: {
      auto l = eval_in(T, inst, q->lhs), r = eval_in(T, inst, q->rhs);
      if (!l || !r) return std::nullopt;
      return T.L.meet(*l, *r);
    }
  }
  return std::nullopt;
}

namespace detail {

// Top/Bot evaluate through the embedded base bounds when the embedding maps
// them, and to the target's own bounds otherwise (bound-preserving case).
inline TestLattice with_base_bounds(TestLattice t, const FiniteLattice& base) {
  auto img = [&](const std::string& base_label, const std::string& fallback) {
    auto it = t.embed.find(base_label);
    return it != t.embed.end() ? it->second : fallback;
  };
  t.embed[two_point().top_label()] = img(base.top_label(), t.L.top_label());
  t.embed[two_point().bottom_label()] = img(base.bottom_label(), t.L.bottom_label());
  return t;
}

inline bool for_each_inst_rec(const std::vector<std::pair<std::string, QualPtr>>& vars, std::size_t i,
                              const TestLattice& T, Instantiation& inst,
                              const std::function<bool(const Instantiation&)>& fn) {
  if (i == vars.size()) return fn(inst);
  auto bound = eval_in(T, inst, vars[i].second);
  if (!bound) return true;  // ill-formed bound; nothing to enumerate
  for (int e = 0; e < T.L.size(); ++e) {
    if (!T.L.leq(e, *bound)) continue;
    inst[vars[i].first] = e;
    if (!for_each_inst_rec(vars, i + 1, T, inst, fn)) return false;
  }
  inst.erase(vars[i].first);
  return true;
}

inline std::vector<std::pair<std::string, QualPtr>> qual_entries(const Env& env) {
  std::vector<std::pair<std::string, QualPtr>> out;
  for (const Binding& b : env.entries()) {
    if (b.kind == BindKind::QualVar) out.emplace_back(b.name, b.qual_bound);
    if (b.kind == BindKind::TermVar) out.emplace_back(b.name, b.term_type.qual);
  }
  return out;
}

}  // namespace detail

// Exhaustively yields every bound-respecting assignment, left to right so
// bounds are ground at assignment time.  fn returns false to stop early.
inline void for_each_instantiation(const Env& env, const FiniteLattice& base, const TestLattice& raw,
                                   const std::function<bool(const Instantiation&)>& fn) {
  TestLattice T = detail::with_base_bounds(raw, base);
  Instantiation inst;
  detail::for_each_inst_rec(detail::qual_entries(env), 0, T, inst, fn);
}

inline std::vector<Instantiation> enumerate_instantiations(const Env& env, const FiniteLattice& base,
                                                           const TestLattice& T) {
  std::vector<Instantiation> out;
  for_each_instantiation(env, base, T, [&](const Instantiation& i) {
    out.push_back(i);
    return true;
  });
  return out;
}

struct OracleCounterexample {
  std::string lattice;
  std::vector<std::pair<std::string, std::string>> assignment;  // var -> element label
};

// Checks eval(Q[inst]) <= eval(R[inst]) over every instantiation in every
// listed lattice; nullopt means the inequality holds everywhere.  Lattices
// are visited in order and instantiations lexicographically, so reported
// counterexamples are minimal and stable.
inline std::optional<OracleCounterexample> oracle_leq(const Env& env, const FiniteLattice& base,
                                                      const QualPtr& q, const QualPtr& r,
                                                      const std::vector<TestLattice>& lattices) {
  std::optional<OracleCounterexample> found;
  for (const TestLattice& raw : lattices) {
    TestLattice T = detail::with_base_bounds(raw, base);
    for_each_instantiation(env, base, raw, [&](const Instantiation& inst) {
      auto l = eval_in(T, inst, q), rr = eval_in(T, inst, r);
      if (!l || !rr) return true;
      if (!T.L.leq(*l, *rr)) {
        OracleCounterexample ce;
        ce.lattice = T.L.name();
        for (const auto& [v, e] : inst) ce.assignment.emplace_back(v, T.L.label_of(e));
        found = std::move(ce);
        return false;
      }
      return true;
    });
    if (found) return found;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Random formulas and environments.

struct GenConfig {
  int max_formula_depth = 4;
  int max_term_depth = 4;
  int n_qual_vars = 3;
  int count = 100;
  int fuel = 500;
  std::uint64_t seed = 1;
  bool use_consts = false;  // draw Const leaves from the base lattice
};

inline QualPtr gen_formula(Rng& rng, const std::vector<std::string>& vars, const FiniteLattice& base,
                           bool use_consts, int depth) {
  if (depth <= 0 || rng.chance(40)) {
    int n_leaf = 2 + (vars.empty() ? 0 : 2) + (use_consts ? 2 : 0);
    int k = rng.below(n_leaf);
    if (k == 0) return Qual::top();
    if (k == 1) return Qual::bot();
    if (!vars.empty() && k <= 3) return Qual::var(rng.pick(vars));
    return Qual::cst(base.labels()[static_cast<std::size_t>(rng.below(base.size()))]);
  }
  QualPtr l = gen_formula(rng, vars, base, use_consts, depth - 1);
  QualPtr r = gen_formula(rng, vars, base, use_consts, depth - 1);
  return rng.chance(50) ? Qual::join(l, r) : Qual::meet(l, r);
}

inline Env gen_env(Rng& rng, const GenConfig& cfg, const FiniteLattice& base) {
  static const std::vector<std::string> pool = {"X", "Y", "Z", "W", "V"};
  Env env;
  std::vector<std::string> in_scope;
  int n = 1 + rng.below(cfg.n_qual_vars);
  for (int i = 0; i < n && i < static_cast<int>(pool.size()); ++i) {
    QualPtr bound = rng.chance(50) ? Qual::top()
                                   : gen_formula(rng, in_scope, base, cfg.use_consts,
                                                 std::min(2, cfg.max_formula_depth));
    env = env.with_qual_var(pool[static_cast<std::size_t>(i)], bound);
    in_scope.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return env;
}

inline std::vector<std::string> env_qual_var_names(const Env& env) {
  std::vector<std::string> out;
  for (const Binding& b : env.entries())
    if (b.kind == BindKind::QualVar) out.push_back(b.name);
  return out;
}

// ---------------------------------------------------------------------------
// Type-directed term generation.  Compositions only use side conditions that
// hold by construction; the real checker validates every emitted program.

struct GenerationExhausted : std::runtime_error {
  GenerationExhausted() : std::runtime_error("term generation budget exhausted") {}
};

class TermGen {
 public:
  TermGen(Rng& rng, Calculus calc, const FiniteLattice& base) : rng_(rng), calc_(calc), base_(base) {}

  TermPtr program(int depth) {
    for (int attempt = 0; attempt < 32; ++attempt) {
      try {
        TermPtr t = term(Env{}, Qual::top(), depth);
        check(Env{}, t);
        return t;
      } catch (const TypeError&) {
        continue;
      }
    }
    throw GenerationExhausted{};
  }

 private:
  CheckContext ctx() const {
    CheckContext c;
    c.calculus = calc_;
    c.base = &base_;
    c.store_typing = &empty_sigma_;
    return c;
  }
  QualType check(const Env& env, const TermPtr& t) {
    TypeChecker tc(ctx());
    return tc.infer(env, Qual::top(), t);
  }
  QualType check_under(const Env& env, const QualPtr& colour, const TermPtr& t) {
    TypeChecker tc(ctx());
    return tc.infer(env, colour, t);
  }

  std::string fresh(const char* base) { return base + std::to_string(fresh_++); }

  // A tag an applied function may carry under colour context R.
  QualPtr callable_tag(const QualPtr& colour) {
    if (calc_ != Calculus::Fa) return rng_.chance(50) ? Qual::bot() : colour;
    return rng_.chance(60) ? Qual::bot() : colour;
  }

  QualPtr tag(const Env& env) {
    std::vector<std::string> vars;
    for (const Binding& b : env.entries())
      if (b.kind == BindKind::QualVar) vars.push_back(b.name);
    return gen_formula(rng_, vars, base_, false, 1);
  }

  QualType gen_qtype(const Env& env, int depth) {
    std::vector<std::string> vars;
    for (const Binding& b : env.entries())
      if (b.kind == BindKind::QualVar) vars.push_back(b.name);
    QualPtr q = gen_formula(rng_, vars, base_, false, 1);
    if (depth > 0 && rng_.chance(30))
      return qt(q, t_arrow(gen_qtype(env, depth - 1), gen_qtype(env, depth - 1)));
    return qt(q, t_top());
  }

  // Best-effort closed-ish inhabitant of a type; nullptr for type variables.
  TermPtr synth_value(const Env& env, const QualType& goal, int depth) {
    const QualPtr& q = goal.qual;
    if (type_as<TTop>(goal.shape)) {
      std::string x = fresh("x");
      if (calc_ == Calculus::Fc) return e_cabs(q, x, qt(Qual::top(), t_top()), e_var(x));
      return e_abs(q, x, qt(Qual::bot(), t_top()), e_var(x));
    }
    if (auto* a = type_as<TArrow>(goal.shape)) {
      std::string x = fresh("x");
      TermPtr body = depth > 0 ? synth_value(env, a->result, depth - 1) : nullptr;
      if (!body) return nullptr;
      return e_abs(q, x, a->param, body);
    }
    if (type_as<TUnit>(goal.shape)) return e_unit_tagged(q);
    if (auto* al = type_as<TAll>(goal.shape)) {
      TermPtr body = depth > 0 ? synth_value(env.with_type_var(al->var, al->bound), al->body, depth - 1)
                               : nullptr;
      if (!body) return nullptr;
      return e_tabs(q, al->var, al->bound, body);
    }
    if (auto* qa = type_as<TQAll>(goal.shape)) {
      TermPtr body =
          depth > 0 ? synth_value(env.with_qual_var(qa->var, qa->bound), qa->body, depth - 1) : nullptr;
      if (!body) return nullptr;
      return e_qabs(q, qa->var, qa->bound, body);
    }
    if (auto* bx = type_as<TBox>(goal.shape)) {
      if (calc_ != Calculus::Fm) return nullptr;
      TermPtr content = depth > 0 ? synth_value(env, bx->content, depth - 1) : nullptr;
      if (!content) return nullptr;
      return e_ref(q, content);
    }
    return nullptr;
  }

  TermPtr value(const Env& env, const QualPtr& colour, int depth) {
    if (calc_ == Calculus::Fc) return value_fc(env, colour, depth);
    int k = rng_.below(depth > 0 ? 3 : 1);
    if (k == 0) {
      QualType pt = gen_qtype(env, depth > 0 ? depth - 1 : 0);
      std::string x = fresh("x");
      QualPtr p = tag(env);
      Env inner = env.with_term_var(x, pt);
      TermPtr body = depth > 0 ? term(inner, p, depth - 1) : leaf(inner);
      return e_abs(p, x, pt, body);
    }
    if (k == 1) {
      std::string X = fresh("T");
      QualPtr p = tag(env);
      TypePtr bound = t_top();
      Env inner = env.with_type_var(X, bound);
      return e_tabs(p, X, bound, value(inner, p, depth - 1));
    }
    std::string Y = fresh("Q");
    QualPtr p = tag(env);
    QualPtr bound = tag(env);
    Env inner = env.with_qual_var(Y, bound);
    return e_qabs(p, Y, bound, value(inner, p, depth - 1));
  }

  TermPtr value_fc(const Env& env, const QualPtr& colour, int depth) {
    std::string x = fresh("x");
    QualPtr bound = rng_.chance(70) ? Qual::top() : Qual::bot();
    Env inner = env.with_term_var(x, qt(bound, t_top()));
    TermPtr body = depth > 0 ? term(inner, colour, depth - 1) : e_var(x);
    TermPtr cand = e_cabs(Qual::bot(), x, qt(bound, t_top()), body);
    // Tag with the join of the captured variables, then optional slack.
    QualPtr fv = join_of_vars(free_term_vars_fc(cand, env));
    if (rng_.chance(30)) fv = Qual::join(fv, Qual::bot());
    return e_cabs(fv, x, qt(bound, t_top()), body);
  }

  TermPtr leaf(const Env& env) {
    std::vector<std::pair<std::string, QualType>> terms;
    for (const Binding& b : env.entries())
      if (b.kind == BindKind::TermVar) terms.emplace_back(b.name, b.term_type);
    if (!terms.empty() && rng_.chance(60)) return e_var(rng_.pick(terms).first);
    if (calc_ == Calculus::Fc) return value_fc(env, Qual::top(), 0);
    QualType pt = qt(Qual::bot(), t_top());
    std::string x = fresh("x");
    return e_abs(tag(env), x, pt, e_var(x));
  }

  TermPtr term(const Env& env, const QualPtr& colour, int depth) {
    if (depth <= 0) return leaf(env);
    if (calc_ == Calculus::Fc) return term_fc(env, colour, depth);

    int moves = calc_ == Calculus::Fm ? 8 : 6;
    switch (rng_.below(moves)) {
      case 0:
        return value(env, colour, depth);
      case 1:
        return leaf(env);
      case 2: {  // beta redex with a freshly built function
        TermPtr arg = term(env, colour, depth - 1);
        QualType ta = check_under(env, colour, arg);
        std::string x = fresh("x");
        QualPtr p = callable_tag(colour);
        TermPtr body = term(env.with_term_var(x, ta), body_colour(p, colour), depth - 1);
        return e_app(e_abs(p, x, ta, body), arg);
      }
      case 3: {  // qualifier abstraction applied
        std::vector<std::string> vars = env_qual_var_names_local(env);
        QualPtr qarg = gen_formula(rng_, vars, base_, false, 1);
        QualPtr bound = rng_.chance(50) ? qarg : Qual::join(qarg, tag(env));
        std::string y = fresh("Q");
        QualPtr p = callable_tag(colour);
        TermPtr body = term(env.with_qual_var(y, bound), body_colour(p, colour), depth - 1);
        return e_qapp(e_qabs(p, y, bound, body), qarg);
      }
      case 4: {  // upqual / assert over a subterm
        TermPtr sub = term(env, colour, depth - 1);
        QualType ty = check_under(env, colour, sub);
        QualPtr up = rng_.chance(50) ? ty.qual : Qual::join(ty.qual, tag(env));
        return rng_.chance(50) ? e_upqual(up, sub) : e_assert(up, sub);
      }
      case 5: {  // type abstraction applied
        std::string X = fresh("T");
        QualPtr p = callable_tag(colour);
        TermPtr body = term(env.with_type_var(X, t_top()), body_colour(p, colour), depth - 1);
        return e_tapp(e_tabs(p, X, t_top(), body), t_top());
      }
      case 6: {  // fm: allocate, write, read back
        TermPtr init = term(env, colour, depth - 1);
        QualType ti = check_under(env, colour, init);
        std::string r = fresh("r");
        Env inner = env.with_term_var(r, qt(Qual::bot(), t_box(ti)));
        TermPtr use;
        int mode = rng_.below(3);
        if (mode == 0) {
          use = e_deref(e_var(r));
        } else {
          TermPtr v2 = synth_value(inner, ti, 2);
          if (!v2) {
            use = e_deref(e_var(r));
          } else if (mode == 1) {
            std::string u = fresh("u");
            TermPtr seq_body = e_deref(e_var(r));
            use = e_app(e_abs(Qual::bot(), u, qt(Qual::bot(), t_unit()), seq_body),
                        e_assign(e_var(r), v2));
          } else {
            use = e_assign(e_var(r), v2);
          }
        }
        return e_app(e_abs(Qual::bot(), r, qt(Qual::bot(), t_box(ti)), use), e_ref(Qual::bot(), init));
      }
      case 7: {  // fm: read through a sealed reference; readonly propagates
        TermPtr init = term(env, colour, depth - 1);
        return e_deref(e_ref(rng_.chance(50) ? Qual::top() : Qual::join(Qual::top(), Qual::bot()), init));
      }
      default:
        return leaf(env);
    }
  }

  TermPtr term_fc(const Env& env, const QualPtr& colour, int depth) {
    switch (rng_.below(5)) {
      case 0:
        return value_fc(env, colour, depth);
      case 1:
        return leaf(env);
      case 2: {  // three-argument application of a fresh capture binder
        TermPtr arg = term(env, colour, depth - 1);
        QualType ta = check_under(env, colour, arg);
        std::string x = fresh("x");
        QualPtr bound = rng_.chance(50) ? ta.qual : Qual::join(ta.qual, Qual::top());
        Env inner = env.with_term_var(x, qt(bound, ta.shape));
        TermPtr body = term(inner, colour, depth - 1);
        TermPtr cand = e_cabs(Qual::bot(), x, qt(bound, ta.shape), body);
        QualPtr fv = join_of_vars(free_term_vars_fc(cand, env));
        return e_capp(e_cabs(fv, x, qt(bound, ta.shape), body), ta.qual, arg);
      }
      case 3: {  // upqual / assert
        TermPtr sub = term(env, colour, depth - 1);
        QualType ty = check_under(env, colour, sub);
        QualPtr up = rng_.chance(50) ? ty.qual : Qual::join(ty.qual, Qual::top());
        return rng_.chance(50) ? e_upqual(up, sub) : e_assert(up, sub);
      }
      default: {  // qualifier abstraction applied
        QualPtr qarg = Qual::bot();
        std::string y = fresh("Q");
        QualPtr p = Qual::bot();
        Env inner = env.with_qual_var(y, Qual::top());
        TermPtr body = term(inner, colour, depth - 1);
        TermPtr cand = e_qabs(p, y, Qual::top(), body);
        QualPtr fv = join_of_vars(free_term_vars_fc(cand, env));
        return e_qapp(e_qabs(fv, y, Qual::top(), body), qarg);
      }
    }
  }

  QualPtr body_colour(const QualPtr& tag, const QualPtr& outer) const {
    return calc_ == Calculus::Fa ? tag : outer;
  }

  static std::vector<std::string> env_qual_var_names_local(const Env& env) {
    std::vector<std::string> out;
    for (const Binding& b : env.entries())
      if (b.kind == BindKind::QualVar) out.push_back(b.name);
    return out;
  }

  Rng& rng_;
  Calculus calc_;
  const FiniteLattice& base_;
  int fresh_ = 0;
  std::map<int, QualType> empty_sigma_;
};

inline TermPtr gen_well_typed_term(Rng& rng, Calculus calc, const FiniteLattice& base, int depth) {
  TermGen g(rng, calc, base);
  return g.program(depth);
}

// ---------------------------------------------------------------------------
// Suite reports.

struct SuiteReport {
  std::string name;
  std::uint64_t seed = 0;
  int checked = 0;
  int violations = 0;
  int warnings = 0;
  int fuel_exhausted = 0;
  std::vector<std::string> failures;
  std::vector<std::string> miss_corpus;  // heuristic-completeness misses (one JSON object per line)

  bool ok() const { return violations == 0; }

  std::string text() const {
    std::ostringstream os;
    os << name << ": checked " << checked << ", violations " << violations << ", warnings " << warnings;
    if (fuel_exhausted) os << ", fuel-exhausted " << fuel_exhausted;
    os << " (seed " << seed << ")\n";
    for (const auto& f : failures) os << "  FAIL " << f << '\n';
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// The derivability order is a lattice: reflexive, transitive, with \/ and
// /\ as least upper and greatest lower bounds.

inline SuiteReport run_lattice_laws_suite(const GenConfig& cfg) {
  SuiteReport rep;
  rep.name = "lattice-laws(two-point)";
  rep.seed = cfg.seed;
  Rng rng(cfg.seed);
  const FiniteLattice& L = two_point();
  for (int i = 0; i < cfg.count; ++i) {
    Env env = gen_env(rng, cfg, L);
    std::vector<std::string> vars = env_qual_var_names(env);
    QualPtr q = gen_formula(rng, vars, L, false, cfg.max_formula_depth);
    QualPtr r = gen_formula(rng, vars, L, false, cfg.max_formula_depth);
    QualPtr u = gen_formula(rng, vars, L, false, cfg.max_formula_depth);
    ++rep.checked;
    auto holds = [&](const QualPtr& a, const QualPtr& b) {
      SqDerivPtr d = subqual(env, L, a, b);
      if (d && !replay_subqual(env, L, d)) {
        ++rep.violations;
        rep.failures.push_back("replay failed: " + print_qual(a) + " <: " + print_qual(b));
      }
      return d != nullptr;
    };
    auto violation = [&](const std::string& what) {
      ++rep.violations;
      rep.failures.push_back(what + " [sample " + std::to_string(i) + "]");
    };
    if (!holds(q, q)) violation("reflexivity: " + print_qual(q));
    if (holds(q, r) && holds(r, u) && !holds(q, u))
      violation("transitivity: " + print_qual(q) + " <: " + print_qual(r) + " <: " + print_qual(u));
    QualPtr qr = Qual::join(q, r);
    if (!holds(q, qr)) violation("join ub left: " + print_qual(qr));
    if (!holds(r, qr)) violation("join ub right: " + print_qual(qr));
    if (holds(q, u) && holds(r, u) && !holds(qr, u))
      violation("join least: " + print_qual(qr) + " <: " + print_qual(u));
    QualPtr qm = Qual::meet(q, r);
    if (!holds(qm, q)) violation("meet lb left: " + print_qual(qm));
    if (!holds(qm, r)) violation("meet lb right: " + print_qual(qm));
    if (holds(u, q) && holds(u, r) && !holds(u, qm))
      violation("meet greatest: " + print_qual(u) + " <: " + print_qual(qm));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Instantiation soundness: derivable subqualifications hold under every
// bound-respecting instantiation into the test lattices; NotDerivable
// answers get a heuristic counterexample hunt.

inline SuiteReport run_soundness_agreement_suite(const GenConfig& cfg, const FiniteLattice& base) {
  SuiteReport rep;
  rep.name = "oracle-agreement(" + base.name() + ")";
  rep.seed = cfg.seed;
  Rng rng(cfg.seed);
  std::vector<TestLattice> targets =
      base.size() == 2 && base.name() == "two_point" ? two_point_extension_lattices()
                                                    : extension_lattices(base);
  for (int i = 0; i < cfg.count; ++i) {
    Env env = gen_env(rng, cfg, base);
    std::vector<std::string> vars = env_qual_var_names(env);
    QualPtr q = gen_formula(rng, vars, base, cfg.use_consts, cfg.max_formula_depth);
    QualPtr r = gen_formula(rng, vars, base, cfg.use_consts, cfg.max_formula_depth);
    ++rep.checked;
    SqDerivPtr d = subqual(env, base, q, r);
    auto ce = oracle_leq(env, base, q, r, targets);
    if (d && ce) {
      ++rep.violations;
      std::ostringstream os;
      os << "soundness: derivable but fails in " << ce->lattice << " with";
      for (const auto& [v, e] : ce->assignment) os << ' ' << v << ":=" << e;
      os << " for " << print_qual(q) << " <: " << print_qual(r) << " [sample " << std::to_string(i)
         << "]";
      rep.failures.push_back(os.str());
    } else if (!d && !ce) {
      ++rep.warnings;
      nlohmann::json miss;
      miss["base"] = base.name();
      miss["sample"] = i;
      miss["lhs"] = print_qual(q);
      miss["rhs"] = print_qual(r);
      rep.miss_corpus.push_back(miss.dump());
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Textual joins and meets agree with the lattice tables (exhaustive).

inline SuiteReport run_textual_join_meet_suite() {
  SuiteReport rep;
  rep.name = "textual-join-meet";
  for (const FiniteLattice& L : catalog_small_lattices()) {
    Env env;
    for (int a = 0; a < L.size(); ++a) {
      for (int b = 0; b < L.size(); ++b) {
        ++rep.checked;
        QualPtr l1 = Qual::cst(L.label_of(a)), l2 = Qual::cst(L.label_of(b));
        if (!qual_equiv(env, L, Qual::join(l1, l2), Qual::cst(L.label_of(L.join(a, b))))) {
          ++rep.violations;
          rep.failures.push_back(L.name() + ": join " + L.label_of(a) + " " + L.label_of(b));
        }
        if (!qual_equiv(env, L, Qual::meet(l1, l2), Qual::cst(L.label_of(L.meet(a, b))))) {
          ++rep.violations;
          rep.failures.push_back(L.name() + ": meet " + L.label_of(a) + " " + L.label_of(b));
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Progress & preservation runners.  The optional mutate hook corrupts each
// reduct before checking, to prove the suite detects violations.

using MutateHook = std::function<TermPtr(const TermPtr&)>;

inline SuiteReport run_fq_soundness_suite(const GenConfig& cfg, const MutateHook& mutate = {}) {
  SuiteReport rep;
  rep.name = "progress-preservation(fq)";
  rep.seed = cfg.seed;
  Rng rng(cfg.seed);
  const FiniteLattice& L = two_point();
  for (int i = 0; i < cfg.count; ++i) {
    TermPtr t = gen_well_typed_term(rng, Calculus::Fq, L, cfg.max_term_depth);
    ++rep.checked;
    QualType ty;
    try {
      ty = type_of(Env{}, t);
    } catch (const TypeError& e) {
      ++rep.violations;
      rep.failures.push_back(std::string("generator contract: ") + e.what());
      continue;
    }
    Evaluator ev(L);
    bool done = false;
    for (int s = 0; s < cfg.fuel && !done; ++s) {
      StepResult r = ev.step(t);
      if (std::get_if<IsValue>(&r)) {
        QualPtr vt = tag_of_value(t);
        if (!subqual(Env{}, L, vt, ty.qual)) {
          ++rep.violations;
          rep.failures.push_back("tag/type correspondence [sample " + std::to_string(i) + "]");
        }
        done = true;
        break;
      }
      if (auto* st = std::get_if<Stuck>(&r)) {
        ++rep.violations;
        rep.failures.push_back(std::string("progress: stuck (") + stuck_kind_name(st->kind) +
                               ") at step " + std::to_string(s) + " [sample " + std::to_string(i) +
                               "]: " + print_term(t));
        done = true;
        break;
      }
      t = std::get<Stepped>(r).term;
      if (mutate) t = mutate(t);
      try {
        QualType ty2 = type_of(Env{}, t);
        if (!subtype_holds(Env{}, L, ty2, ty)) {
          ++rep.violations;
          rep.failures.push_back("preservation: type not a subtype at step " + std::to_string(s) +
                                 " [sample " + std::to_string(i) + "]");
          done = true;
        }
        ty = ty2;
      } catch (const TypeError& e) {
        ++rep.violations;
        rep.failures.push_back(std::string("preservation: reduct ill-typed [sample ") +
                               std::to_string(i) + "]: " + e.what());
        done = true;
      }
    }
    if (!done) ++rep.fuel_exhausted;
  }
  return rep;
}

inline SuiteReport run_fm_soundness_suite(const GenConfig& cfg, const MutateHook& mutate = {}) {
  SuiteReport rep;
  rep.name = "progress-preservation(fm)";
  rep.seed = cfg.seed;
  Rng rng(cfg.seed);
  const FiniteLattice& L = two_point();
  for (int i = 0; i < cfg.count; ++i) {
    TermPtr t = gen_well_typed_term(rng, Calculus::Fm, L, cfg.max_term_depth);
    ++rep.checked;
    Store store;
    StoreTyping sigma;
    // ref_map holds the content type the current derivation assigned to each
    // ref node; allocations extend the store typing with exactly these.
    std::map<const Term*, QualType> ref_map;
    auto typed = [&](const TermPtr& term) {
      CheckContext c;
      c.calculus = Calculus::Fm;
      c.base = &L;
      c.store_typing = &sigma;
      c.ref_types = &ref_map;
      ref_map.clear();
      TypeChecker tc(c);
      return tc.infer(Env{}, term);
    };
    QualType ty;
    try {
      ty = typed(t);
    } catch (const TypeError& e) {
      ++rep.violations;
      rep.failures.push_back(std::string("generator contract: ") + e.what());
      continue;
    }
    Evaluator ev(L, &store);
    bool done = false;
    for (int s = 0; s < cfg.fuel && !done; ++s) {
      StepEvent event;
      StepResult r = ev.step(t, &event);
      if (std::get_if<IsValue>(&r)) {
        done = true;
        break;
      }
      if (auto* st = std::get_if<Stuck>(&r)) {
        ++rep.violations;
        rep.failures.push_back(std::string("progress: stuck (") + stuck_kind_name(st->kind) +
                               ") [sample " + std::to_string(i) + "]: " + print_term(t));
        done = true;
        break;
      }
      t = std::get<Stepped>(r).term;
      if (mutate) t = mutate(t);
      if (auto* al = std::get_if<EvAlloc>(&event)) {
        auto rt = ref_map.find(al->node);
        if (rt != ref_map.end()) {
          sigma[al->id] = rt->second;
        } else {
          try {
            sigma[al->id] = type_of_fm(Env{}, sigma, al->value);
          } catch (const TypeError& e) {
            ++rep.violations;
            rep.failures.push_back(std::string("store typing: ") + e.what());
            done = true;
            continue;
          }
        }
      }
      if (auto* dr = std::get_if<EvDeref>(&event)) {
        if (dr->ref_tag == L.top_label() && dr->result_tag != L.top_label()) {
          ++rep.violations;
          rep.failures.push_back("transitive immutability: deref through top gave " + dr->result_tag +
                                 " [sample " + std::to_string(i) + "]");
        }
      }
      if (!store_consistent(L, sigma, store)) {
        ++rep.violations;
        rep.failures.push_back("store consistency [sample " + std::to_string(i) + "]");
        done = true;
        continue;
      }
      try {
        QualType ty2 = typed(t);
        if (!subtype_holds(Env{}, L, ty2, ty)) {
          ++rep.violations;
          rep.failures.push_back("preservation [sample " + std::to_string(i) + "]");
          done = true;
        }
        ty = ty2;
      } catch (const TypeError& e) {
        ++rep.violations;
        rep.failures.push_back(std::string("preservation: reduct ill-typed [sample ") +
                               std::to_string(i) + "]: " + e.what());
        done = true;
      }
    }
    if (!done) ++rep.fuel_exhausted;
  }
  return rep;
}

inline SuiteReport run_fa_soundness_suite(const GenConfig& cfg) {
  SuiteReport rep;
  rep.name = "progress-preservation(fa)";
  rep.seed = cfg.seed;
  Rng rng(cfg.seed);
  const FiniteLattice& L = two_point();
  for (int i = 0; i < cfg.count; ++i) {
    TermPtr t = gen_well_typed_term(rng, Calculus::Fa, L, cfg.max_term_depth);
    ++rep.checked;
    try {
      type_of_fa(L, Env{}, Qual::top(), t);
    } catch (const TypeError& e) {
      ++rep.violations;
      rep.failures.push_back(std::string("generator contract: ") + e.what());
      continue;
    }
    MachineConfig cfg_m{t, {}};
    auto ty = type_of_config(L, cfg_m);
    if (!ty) {
      ++rep.violations;
      rep.failures.push_back("initial configuration ill-typed [sample " + std::to_string(i) + "]");
      continue;
    }
    bool done = false;
    for (int s = 0; s < cfg.fuel && !done; ++s) {
      MachineResult r = machine_step(L, cfg_m);
      if (std::get_if<MachineFinal>(&r)) {
        done = true;
        break;
      }
      if (auto* st = std::get_if<Stuck>(&r)) {
        ++rep.violations;
        rep.failures.push_back(std::string("machine progress: stuck (") + stuck_kind_name(st->kind) +
                               ") [sample " + std::to_string(i) + "]: " + print_machine_config(cfg_m));
        done = true;
        break;
      }
      cfg_m = std::get<MachineConfig>(r);
      auto ty2 = type_of_config(L, cfg_m);
      if (!ty2) {
        ++rep.violations;
        rep.failures.push_back("machine preservation: configuration ill-typed at step " +
                               std::to_string(s) + " [sample " + std::to_string(i) + "]");
        done = true;
        continue;
      }
      if (!subtype_holds(Env{}, L, *ty2, *ty)) {
        ++rep.violations;
        rep.failures.push_back("machine preservation: answer type grew [sample " + std::to_string(i) +
                               "]");
        done = true;
      }
      ty = ty2;
    }
    if (!done) ++rep.fuel_exhausted;
  }
  return rep;
}

inline SuiteReport run_fc_soundness_suite(const GenConfig& cfg, const MutateHook& mutate = {}) {
  SuiteReport rep;
  rep.name = "progress-preservation(fc)";
  rep.seed = cfg.seed;
  Rng rng(cfg.seed);
  const FiniteLattice& L = two_point();
  for (int i = 0; i < cfg.count; ++i) {
    TermPtr t = gen_well_typed_term(rng, Calculus::Fc, L, cfg.max_term_depth);
    ++rep.checked;
    QualType ty;
    try {
      ty = type_of_fc(L, Env{}, t);
    } catch (const TypeError& e) {
      ++rep.violations;
      rep.failures.push_back(std::string("generator contract: ") + e.what());
      continue;
    }
    if (!capture_prediction_everywhere(L, Env{}, t)) {
      ++rep.violations;
      rep.failures.push_back("capture prediction (initial) [sample " + std::to_string(i) + "]");
      continue;
    }
    Evaluator ev(L);
    bool done = false;
    for (int s = 0; s < cfg.fuel && !done; ++s) {
      StepResult r = ev.step(t);
      if (std::get_if<IsValue>(&r)) {
        if (!capture_prediction_check(L, Env{}, t)) {
          ++rep.violations;
          rep.failures.push_back("capture prediction (final value) [sample " + std::to_string(i) + "]");
        }
        done = true;
        break;
      }
      if (auto* st = std::get_if<Stuck>(&r)) {
        ++rep.violations;
        rep.failures.push_back(std::string("progress: stuck (") + stuck_kind_name(st->kind) +
                               ") [sample " + std::to_string(i) + "]: " + print_term(t));
        done = true;
        break;
      }
      t = std::get<Stepped>(r).term;
      if (mutate) t = mutate(t);
      if (!capture_prediction_everywhere(L, Env{}, t)) {
        ++rep.violations;
        rep.failures.push_back("capture prediction at step " + std::to_string(s) + " [sample " +
                               std::to_string(i) + "]");
        done = true;
        continue;
      }
      try {
        QualType ty2 = type_of_fc(L, Env{}, t);
        if (!subtype_holds(Env{}, L, ty2, ty)) {
          ++rep.violations;
          rep.failures.push_back("preservation [sample " + std::to_string(i) + "]");
          done = true;
        }
        ty = ty2;
      } catch (const TypeError& e) {
        ++rep.violations;
        rep.failures.push_back(std::string("preservation: reduct ill-typed [sample ") +
                               std::to_string(i) + "]: " + e.what());
        done = true;
      }
    }
    if (!done) ++rep.fuel_exhausted;
  }
  return rep;
}

// Flip the first bot tag to top; preservation must notice.
inline TermPtr corrupt_first_bot_tag(const TermPtr& t) {
  if (is_value(t)) {
    QualPtr tg = tag_of_value(t);
    if (tg && tg->kind == QualKind::Bot) return retag_value(t, Qual::top());
  }
  if (auto* ap = term_as<EApp>(t)) {
    TermPtr f = corrupt_first_bot_tag(ap->fn);
    if (f != ap->fn) return e_app(f, ap->arg);
    TermPtr a = corrupt_first_bot_tag(ap->arg);
    if (a != ap->arg) return e_app(ap->fn, a);
  }
  if (auto* up = term_as<EUpqual>(t)) {
    TermPtr b = corrupt_first_bot_tag(up->body);
    if (b != up->body) return e_upqual(up->qual, b);
  }
  if (auto* as = term_as<EAssert>(t)) {
    TermPtr b = corrupt_first_bot_tag(as->body);
    if (b != as->body) return e_assert(as->qual, b);
  }
  return t;
}

}  // namespace fq

#endif  // FQ_ORACLE_HPP
