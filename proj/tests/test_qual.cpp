#include <doctest.h>

#include "fq/oracle.hpp"
#include "fq/printer.hpp"
#include "fq/subqual.hpp"

using namespace fq;

namespace {
QualPtr v(const char* n) { return Qual::var(n); }
}  // namespace

TEST_CASE("well-formedness of formulas and environments") {
  const FiniteLattice& L = two_point();
  Env env = Env{}.with_qual_var("X", Qual::top());
  CHECK(well_formed_qual(env, L, Qual::join(v("X"), Qual::bot())));
  CHECK(!well_formed_qual(Env{}, L, v("X")));
  Env bad = Env{}.with_qual_var("X", v("A"));  // A not yet declared
  CHECK(!env_well_formed_quals(bad, L));
  Env fwd = Env{}.with_qual_var("A", Qual::top()).with_qual_var("X", v("A"));
  CHECK(env_well_formed_quals(fwd, L));
}

TEST_CASE("substitution is plain replacement") {
  QualPtr q = subst_qual(Qual::join(v("X"), v("Y")), "X", Qual::bot());
  CHECK(qual_eq(q, Qual::join(Qual::bot(), v("Y"))));
  CHECK(qual_eq(subst_qual(v("X"), "X", Qual::meet(v("A"), v("B"))), Qual::meet(v("A"), v("B"))));
  CHECK(qual_eq(subst_qual(Qual::meet(v("X"), v("X")), "X", v("Y")), Qual::meet(v("Y"), v("Y"))));
}

TEST_CASE("the worked derivation: X v Y <: A v B") {
  Env env = Env{}
                .with_qual_var("A", Qual::top())
                .with_qual_var("B", Qual::top())
                .with_qual_var("X", v("A"))
                .with_qual_var("Y", v("B"));
  QualPtr lhs = Qual::join(v("X"), v("Y"));
  QualPtr rhs = Qual::join(v("A"), v("B"));
  SqDerivPtr d = subqual(env, lhs, rhs);
  REQUIRE(d);
  CHECK(d->rule == "sq-join-elim");
  REQUIRE(d->premises.size() == 2);
  CHECK(d->premises[0]->rule == "sq-join-intro-1");
  CHECK(qual_eq(d->premises[0]->lhs, v("X")));
  CHECK(d->premises[1]->rule == "sq-join-intro-2");
  CHECK(qual_eq(d->premises[1]->lhs, v("Y")));
  CHECK(replay_subqual(env, two_point(), d));
}

TEST_CASE("bot below everything, reflexivity, and a non-theorem") {
  Env env = Env{}.with_qual_var("X", Qual::top());
  QualPtr q = Qual::meet(v("X"), Qual::join(v("X"), Qual::top()));
  CHECK(subqual(env, Qual::bot(), q));
  CHECK(subqual(env, q, q));
  CHECK(!subqual(env, Qual::top(), v("X")));
  // oracle counterexample: instantiate X := bottom in the two-chain
  auto ce = oracle_leq(env, two_point(), Qual::top(), v("X"), two_point_extension_lattices());
  REQUIRE(ce.has_value());
  CHECK(ce->lattice == "two_chain");
  REQUIRE(ce->assignment.size() == 1);
  CHECK(ce->assignment[0].second == "0");
}

TEST_CASE("textual joins of constants collapse through eval") {
  FiniteLattice two = make_chain("two_chain", {"0", "1"});
  Env env;
  // Const(top) <: 0 v 1 textually, via normalization then sq-lift/sq-top
  SqDerivPtr d = subqual(env, two, Qual::cst("1"), Qual::join(Qual::cst("0"), Qual::cst("1")));
  REQUIRE(d);
  CHECK(replay_subqual(env, two, d));
  CHECK(!oracle_leq(env, two, Qual::cst("1"), Qual::join(Qual::cst("0"), Qual::cst("1")),
                    extension_lattices(two)));

  FiniteLattice m3 = diamond_m3();
  // a v b is equivalent to its lattice join 1
  CHECK(qual_equiv(env, m3, Qual::join(Qual::cst("a"), Qual::cst("b")), Qual::cst("1")));
  // but a alone is not equivalent to 1
  CHECK(!qual_equiv(env, m3, Qual::cst("a"), Qual::cst("1")));
  // sq-lift respects the base order
  CHECK(subqual(env, m3, Qual::cst("a"), Qual::cst("1")));
  CHECK(!subqual(env, m3, Qual::cst("a"), Qual::cst("b")));
}

TEST_CASE("qual_equiv basics") {
  Env env = Env{}.with_qual_var("X", Qual::top()).with_qual_var("Y", Qual::top());
  const FiniteLattice& L = two_point();
  CHECK(qual_equiv(env, L, Qual::meet(v("X"), v("X")), v("X")));
  CHECK(!qual_equiv(env, L, v("X"), v("Y")));  // distinct free generators
}

TEST_CASE("eval wrappers appear in derivations and replay") {
  FiniteLattice m3 = diamond_m3();
  Env env = Env{}.with_qual_var("X", Qual::top());
  // lhs has a ground subterm (a v b); rhs is top, so only the left evaluates
  QualPtr lhs = Qual::meet(Qual::join(Qual::cst("a"), Qual::cst("b")), v("X"));
  SqDerivPtr d = subqual(env, m3, lhs, Qual::top());
  REQUIRE(d);
  CHECK(d->rule == "sq-eval-elim");
  CHECK(replay_subqual(env, m3, d));
}

TEST_CASE("replay rejects tampered derivations") {
  Env env = Env{}.with_qual_var("X", Qual::top());
  SqDerivPtr d = subqual(env, v("X"), Qual::top());
  REQUIRE(d);
  // forge a wrong conclusion
  auto forged = sq_node(d->rule, Qual::top(), Qual::bot(), d->premises);
  CHECK(!replay_subqual(env, two_point(), forged));
  auto wrong_rule = sq_node("sq-bot", d->lhs, d->rhs, d->premises);
  CHECK(!replay_subqual(env, two_point(), wrong_rule));
}

TEST_CASE("normalization is sound for equivalence") {
  Rng rng(99);
  FiniteLattice m3 = diamond_m3();
  Env env = Env{}.with_qual_var("X", Qual::top()).with_qual_var("Y", v("X"));
  std::vector<std::string> vars = {"X", "Y"};
  for (int i = 0; i < 60; ++i) {
    QualPtr q = gen_formula(rng, vars, m3, true, 3);
    CHECK(qual_equiv(env, m3, q, normalize(m3, q)));
  }
}

TEST_CASE("subqual is a partial order with lattice structure (sampled)") {
  GenConfig cfg;
  cfg.count = 150;
  cfg.seed = 12345;
  SuiteReport rep = run_lattice_laws_suite(cfg);
  CHECK(rep.violations == 0);
  CHECK(rep.checked == 150);
}

TEST_CASE("derivable judgments survive instantiation (sampled)") {
  GenConfig cfg;
  cfg.count = 120;
  cfg.seed = 777;
  SuiteReport rep = run_soundness_agreement_suite(cfg, two_point());
  CHECK(rep.violations == 0);
  GenConfig ecfg = cfg;
  ecfg.use_consts = true;
  ecfg.n_qual_vars = 2;
  ecfg.max_formula_depth = 3;
  SuiteReport rep2 = run_soundness_agreement_suite(ecfg, pentagon_n5());
  CHECK(rep2.violations == 0);
}

TEST_CASE("ill-formed input is rejected") {
  Env env;
  CHECK_THROWS_AS(subqual(env, v("X"), Qual::top()), std::invalid_argument);
  Env bad = Env{}.with_qual_var("X", v("Zed"));
  CHECK_THROWS_AS(subqual(bad, Qual::bot(), Qual::top()), std::invalid_argument);
}
