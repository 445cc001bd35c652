#include <doctest.h>

#include <json.hpp>

#include "fq/oracle.hpp"
#include "fq/printer.hpp"

using namespace fq;

TEST_CASE("instantiation enumeration respects bounds") {
  const FiniteLattice& two = two_point();
  Env e1 = Env{}.with_qual_var("X", Qual::top());
  CHECK(enumerate_instantiations(e1, two, identity_extension(two)).size() == 2);
  Env e2 = Env{}.with_qual_var("X", Qual::bot());
  auto only = enumerate_instantiations(e2, two, identity_extension(two));
  REQUIRE(only.size() == 1);
  CHECK(only[0].at("X") == two.bottom_index());
  // [A<:top, X<:A] over the 3-chain: 3 + 2 + 1 = 6 assignments
  FiniteLattice three = make_chain("three_chain", {"0", "m", "1"});
  Env e3 = Env{}.with_qual_var("A", Qual::top()).with_qual_var("X", Qual::var("A"));
  CHECK(enumerate_instantiations(e3, three, identity_extension(three)).size() == 6);
}

TEST_CASE("oracle_leq confirms the worked example and refutes non-theorems") {
  Env env = Env{}
                .with_qual_var("A", Qual::top())
                .with_qual_var("B", Qual::top())
                .with_qual_var("X", Qual::var("A"))
                .with_qual_var("Y", Qual::var("B"));
  QualPtr lhs = Qual::join(Qual::var("X"), Qual::var("Y"));
  QualPtr rhs = Qual::join(Qual::var("A"), Qual::var("B"));
  CHECK(!oracle_leq(env, two_point(), lhs, rhs, two_point_extension_lattices()).has_value());
  CHECK(!oracle_leq(env, two_point(), lhs, lhs, two_point_extension_lattices()).has_value());
  auto ce = oracle_leq(env, two_point(), rhs, lhs, two_point_extension_lattices());
  REQUIRE(ce.has_value());
  CHECK(ce->lattice == "two_chain");  // smallest lattice first
}

TEST_CASE("formula generator contracts") {
  const FiniteLattice& two = two_point();
  Rng rng(5);
  QualPtr leaf = gen_formula(rng, {}, two, false, 0);
  CHECK((leaf->kind == QualKind::Top || leaf->kind == QualKind::Bot));
  Rng a(17), b(17);
  std::vector<std::string> vars = {"X", "Y"};
  for (int i = 0; i < 50; ++i)
    CHECK(qual_key(gen_formula(a, vars, two, false, 4)) == qual_key(gen_formula(b, vars, two, false, 4)));
  Env env = Env{}.with_qual_var("X", Qual::top()).with_qual_var("Y", Qual::top());
  Rng c(23);
  for (int i = 0; i < 50; ++i) CHECK(well_formed_qual(env, two, gen_formula(c, vars, two, false, 4)));
}

TEST_CASE("generated environments are well-formed") {
  GenConfig cfg;
  Rng rng(31);
  for (int i = 0; i < 40; ++i) {
    Env env = gen_env(rng, cfg, two_point());
    CHECK(env_well_formed_quals(env, two_point()));
  }
}

TEST_CASE("term generator contract: everything type checks") {
  for (Calculus calc : {Calculus::Fq, Calculus::Fm, Calculus::Fa, Calculus::Fc}) {
    Rng rng(100 + static_cast<int>(calc));
    CheckContext ctx;
    ctx.calculus = calc;
    ctx.base = &two_point();
    StoreTyping sigma;
    ctx.store_typing = &sigma;
    for (int i = 0; i < 60; ++i) {
      TermPtr t = gen_well_typed_term(rng, calc, two_point(), 4);
      CHECK(is_closed_term(t));
      CHECK_NOTHROW(type_of(ctx, Env{}, t));
    }
  }
}

namespace {
bool contains_assign(const TermPtr& t) {
  if (term_as<EAssign>(t)) return true;
  if (auto* a = term_as<EAbs>(t)) return contains_assign(a->body);
  if (auto* a = term_as<ETAbs>(t)) return contains_assign(a->body);
  if (auto* a = term_as<EQAbs>(t)) return contains_assign(a->body);
  if (auto* a = term_as<EApp>(t)) return contains_assign(a->fn) || contains_assign(a->arg);
  if (auto* a = term_as<ETApp>(t)) return contains_assign(a->fn);
  if (auto* a = term_as<EQApp>(t)) return contains_assign(a->fn);
  if (auto* a = term_as<EUpqual>(t)) return contains_assign(a->body);
  if (auto* a = term_as<EAssert>(t)) return contains_assign(a->body);
  if (auto* a = term_as<ERef>(t)) return contains_assign(a->init);
  if (auto* a = term_as<EDeref>(t)) return contains_assign(a->ref);
  return false;
}
}  // namespace

TEST_CASE("fm generator eventually produces writable boxes") {
  Rng rng(2718);
  bool seen_assign = false;
  for (int i = 0; i < 80 && !seen_assign; ++i)
    seen_assign = contains_assign(gen_well_typed_term(rng, Calculus::Fm, two_point(), 4));
  CHECK(seen_assign);
}

TEST_CASE("soundness suites run clean at small scale") {
  GenConfig cfg;
  cfg.count = 30;
  cfg.seed = 9;
  cfg.max_term_depth = 4;
  cfg.fuel = 400;
  CHECK(run_fq_soundness_suite(cfg).ok());
  CHECK(run_fm_soundness_suite(cfg).ok());
  CHECK(run_fa_soundness_suite(cfg).ok());
  CHECK(run_fc_soundness_suite(cfg).ok());
}

TEST_CASE("the mutation hook makes the suite report violations") {
  GenConfig cfg;
  cfg.count = 30;
  cfg.seed = 9;
  cfg.max_term_depth = 4;
  cfg.fuel = 400;
  SuiteReport fq_rep = run_fq_soundness_suite(cfg, corrupt_first_bot_tag);
  SuiteReport fm_rep = run_fm_soundness_suite(cfg, corrupt_first_bot_tag);
  CHECK(fq_rep.violations + fm_rep.violations > 0);
}

TEST_CASE("miss corpus entries are machine readable") {
  GenConfig cfg;
  cfg.count = 250;
  cfg.seed = 3;
  cfg.use_consts = true;
  cfg.n_qual_vars = 2;
  cfg.max_formula_depth = 3;
  SuiteReport rep = run_soundness_agreement_suite(cfg, diamond_m3());
  CHECK(rep.violations == 0);
  for (const std::string& line : rep.miss_corpus) {
    nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.contains("lhs"));
    CHECK(j.contains("rhs"));
    CHECK(j.contains("base"));
  }
}

TEST_CASE("reports render as text") {
  GenConfig cfg;
  cfg.count = 10;
  cfg.seed = 1;
  SuiteReport rep = run_lattice_laws_suite(cfg);
  std::string txt = rep.text();
  CHECK(txt.find("lattice-laws") != std::string::npos);
  CHECK(txt.find("checked 10") != std::string::npos);
}
