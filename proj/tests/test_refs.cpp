#include <doctest.h>

#include "fq/parser.hpp"
#include "fq/printer.hpp"
#include "fq/refs.hpp"

using namespace fq;

namespace {
const FiniteLattice& L = two_point();
ParseOptions fm_opts() {
  ParseOptions o;
  o.calculus = Calculus::Fm;
  return o;
}
TermPtr p(const std::string& s) { return parse_term(s, fm_opts()); }
QualType ty(const TermPtr& t) {
  StoreTyping sigma;
  return type_of_fm(Env{}, sigma, t);
}
}  // namespace

TEST_CASE("reference introduction and elimination types") {
  CHECK(print_qualtype(ty(p("ref[bot] (fn[bot](x: {bot} Top) => x)"))) ==
        "{bot} Box {bot} ({bot} Top -> {bot} Top)");
  // deref through a readonly box joins the mutabilities
  QualType read = ty(p("!(ref[top] (fn[bot](x: {bot} Top) => x))"));
  CHECK(print_qualtype(read) == "{top \\/ bot} ({bot} Top -> {bot} Top)");
  CHECK(qual_equiv(Env{}, L, read.qual, Qual::top()));
}

TEST_CASE("writes through readonly boxes are rejected statically") {
  TermPtr bad = p("(ref[top] (fn[bot](x: {bot} Top) => x)) := (fn[bot](y: {bot} Top) => y)");
  CHECK_THROWS_WITH_AS(ty(bad), doctest::Contains("E-WRITE-READONLY"), TypeError);
  TermPtr good = p("(ref[bot] (fn[bot](x: {bot} Top) => x)) := (fn[bot](y: {bot} Top) => y)");
  CHECK(print_qualtype(ty(good)) == "{bot} Unit");
}

TEST_CASE("allocate, write, read back") {
  TermPtr prog = p(
      "(fn[bot](r: {bot} Box {bot} ({bot} Top -> {bot} Top)) =>"
      " (fn[bot](u: {bot} Unit) => !r)"
      " (r := (fn[bot](y: {bot} Top) => y)))"
      " (ref[bot] (fn[bot](x: {bot} Top) => x))");
  ty(prog);
  Store store;
  EvalResult r = eval_fuel(L, prog, 50, &store);
  auto* v = std::get_if<EvalValue>(&r);
  REQUIRE(v);
  // the new value came back out of the cell
  CHECK(print_term(v->value) == "fn[bot](y: {bot} Top) => y");
  CHECK(store.size() == 1);
  CHECK(store.cells().at(0).tag == "bot");
}

TEST_CASE("transitive readonly on reads") {
  TermPtr prog = p("!(ref[top] (fn[bot](x: {bot} Top) => x))");
  Store store;
  EvalResult r = eval_fuel(L, prog, 10, &store);
  auto* v = std::get_if<EvalValue>(&r);
  REQUIRE(v);
  auto tag = eval_ground(L, tag_of_value(v->value));
  REQUIRE(tag.has_value());
  CHECK(*tag == L.top_index());
  // also through a frozen (upqualed) mutable box
  TermPtr prog2 = p("!(upqual top (ref[bot] (fn[bot](x: {bot} Top) => x)))");
  Store store2;
  EvalResult r2 = eval_fuel(L, prog2, 10, &store2);
  auto* v2 = std::get_if<EvalValue>(&r2);
  REQUIRE(v2);
  auto tag2 = eval_ground(L, tag_of_value(v2->value));
  REQUIRE(tag2.has_value());
  CHECK(*tag2 == L.top_index());
}

TEST_CASE("sealed writes are stuck at runtime") {
  // ill-typed on purpose; run without checking
  TermPtr prog = p("(ref[top] (fn[bot](x: {bot} Top) => x)) := (fn[bot](y: {bot} Top) => y)");
  Store store;
  EvalResult r = eval_fuel(L, prog, 10, &store);
  auto* st = std::get_if<EvalStuck>(&r);
  REQUIRE(st);
  CHECK(st->stuck.kind == StuckKind::SealedWrite);
  // freezing a reference seals later writes through it
  TermPtr prog2 = p("(upqual top (ref[bot] (fn[bot](x: {bot} Top) => x))) := (fn[bot](y: {bot} Top) => y)");
  Store store2;
  EvalResult r2 = eval_fuel(L, prog2, 10, &store2);
  auto* st2 = std::get_if<EvalStuck>(&r2);
  REQUIRE(st2);
  CHECK(st2->stuck.kind == StuckKind::SealedWrite);
}

TEST_CASE("freezing one alias does not seal the cell") {
  // bind the mutable reference, freeze a copy, then write through the original
  TermPtr prog = p(
      "(fn[bot](r: {bot} Box {bot} ({bot} Top -> {bot} Top)) =>"
      " (fn[bot](frozen: {top} Box {bot} ({bot} Top -> {bot} Top)) =>"
      "  (fn[bot](u: {bot} Unit) => !frozen)"
      "  (r := (fn[bot](y: {bot} Top) => y)))"
      " (upqual top r))"
      " (ref[bot] (fn[bot](x: {bot} Top) => x))");
  ty(prog);
  Store store;
  EvalResult r = eval_fuel(L, prog, 60, &store);
  auto* v = std::get_if<EvalValue>(&r);
  REQUIRE(v);
  // read through the frozen alias sees the write, retagged readonly
  auto tag = eval_ground(L, tag_of_value(v->value));
  REQUIRE(tag.has_value());
  CHECK(*tag == L.top_index());
}

TEST_CASE("locations type against the store typing") {
  StoreTyping sigma;
  sigma[0] = qt(Qual::bot(), t_unit());
  CheckContext ctx;
  ctx.calculus = Calculus::Fm;
  ctx.base = &L;
  ctx.store_typing = &sigma;
  QualType t = type_of(ctx, Env{}, e_loc(0, Qual::top()));
  CHECK(print_qualtype(t) == "{top} Box {bot} Unit");
  CHECK_THROWS_AS(type_of(ctx, Env{}, e_loc(7, Qual::top())), TypeError);
}

TEST_CASE("store consistency check") {
  Store store;
  StoreTyping sigma;
  TermPtr v = p("fn[bot](x: {bot} Top) => x");
  int id = store.alloc("bot", v);
  sigma[id] = ty(v);
  CHECK(store_consistent(L, sigma, store));
  sigma[id] = qt(Qual::bot(), t_unit());  // wrong content type
  CHECK(!store_consistent(L, sigma, store));
}

TEST_CASE("unit values carry tags") {
  CHECK(print_term(p("unit")) == "unit");
  CHECK(print_term(p("unit[top]")) == "unit[top]");
  CHECK(print_qualtype(ty(p("unit[top]"))) == "{top} Unit");
  // deref of a readonly box of unit retags the unit
  TermPtr prog = p("!(ref[top] unit)");
  Store store;
  EvalResult r = eval_fuel(L, prog, 10, &store);
  auto* val = std::get_if<EvalValue>(&r);
  REQUIRE(val);
  CHECK(print_term(val->value) == "unit[top]");
}
