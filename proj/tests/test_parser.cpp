#include <doctest.h>

#include "fq/oracle.hpp"
#include "fq/parser.hpp"
#include "fq/printer.hpp"

using namespace fq;

TEST_CASE("terms parse to the expected shapes") {
  TermPtr id = parse_term("fn[bot](x: {bot} Top) => x");
  auto* abs = term_as<EAbs>(id);
  REQUIRE(abs);
  CHECK(abs->param == "x");
  CHECK(abs->tag->kind == QualKind::Bot);
  CHECK(term_as<EVar>(abs->body));

  TermPtr nested = parse_term("qfn[bot](Y <: top) => fn[Y](x: {Y} Top) => x");
  auto* qa = term_as<EQAbs>(nested);
  REQUIRE(qa);
  CHECK(term_as<EAbs>(qa->body));
}

TEST_CASE("syntax errors carry spans") {
  try {
    parse_term("fn[bot](x");
    FAIL("expected a parse error");
  } catch (const TypeError& e) {
    CHECK(e.diag().code == "E-PARSE");
    CHECK(e.diag().span.line == 1);
    CHECK(e.diag().message.find("end of input") != std::string::npos);
  }
}

TEST_CASE("qualifier precedence: meet binds tighter than join") {
  QualPtr q = parse_qual("A \\/ B /\\ C", ParseOptions{Calculus::Fq, std::nullopt});
  REQUIRE(q->kind == QualKind::Join);
  CHECK(q->rhs->kind == QualKind::Meet);
  CHECK(print_qual(q) == "A \\/ B /\\ C");
  QualPtr m = Qual::meet(Qual::join(Qual::var("A"), Qual::var("B")), Qual::var("C"));
  CHECK(print_qual(m) == "(A \\/ B) /\\ C");
  // right-nested operators keep their parentheses so printing is exact
  QualPtr rj = Qual::join(Qual::var("A"), Qual::join(Qual::var("B"), Qual::var("C")));
  CHECK(print_qual(rj) == "A \\/ (B \\/ C)");
  CHECK(qual_eq(parse_qual(print_qual(rj)), rj));
}

TEST_CASE("comments and whitespace") {
  TermPtr t = parse_term("-- identity\nfn[bot](x: {bot} Top) -- param\n  => x\n");
  CHECK(term_as<EAbs>(t));
}

TEST_CASE("types round-trip") {
  const char* types[] = {
      "Top",
      "{bot} Top -> {top} Top",
      "all (X <: Top) . {bot} X",
      "qall (Y <: top) . {Y} ({Y} Top -> {Y} Top)",
  };
  for (const char* s : types) {
    TypePtr t = parse_stype(s);
    CHECK(alpha_eq_type(parse_stype(print_type(t)), t));
  }
  ParseOptions fm{Calculus::Fm, std::nullopt};
  TypePtr box = parse_stype("Box {bot} Unit", fm);
  CHECK(alpha_eq_type(parse_stype(print_type(box), fm), box));
  ParseOptions fc{Calculus::Fc, std::nullopt};
  TypePtr dep = parse_stype("(x <: top : Top) -> {x} Top", fc);
  CHECK(alpha_eq_type(parse_stype(print_type(dep), fc), dep));
}

TEST_CASE("pragmas select calculus, lattice, and default tag") {
  SourceFile f = split_pragmas("#calculus fm\n#default_tag bot\n-- body\nref[top] unit\n");
  CHECK(f.calculus == Calculus::Fm);
  REQUIRE(f.default_tag.has_value());
  CHECK((*f.default_tag)->kind == QualKind::Bot);
  // line numbers preserved: body still parses with spans on line 4
  ParseOptions opts{f.calculus, f.default_tag};
  TermPtr t = Parser(f.body, opts).parse_term_all();
  CHECK(t->span.line == 4);

  SourceFile g = split_pragmas("#lattice m3.json\nfn[bot](x: {bot} Top) => x\n");
  CHECK(g.lattice_path == "m3.json");
  CHECK_THROWS_AS(split_pragmas("#nonsense x\n"), TypeError);
}

TEST_CASE("the default tag pragma fills omitted tags") {
  ParseOptions opts{Calculus::Fq, Qual::bot()};
  TermPtr t = parse_term("fn(x: {bot} Top) => x", opts);
  auto* abs = term_as<EAbs>(t);
  REQUIRE(abs);
  CHECK(abs->tag->kind == QualKind::Bot);
  CHECK_THROWS_AS(parse_term("fn(x: {bot} Top) => x"), TypeError);  // no pragma, no tag
}

TEST_CASE("environment strings infer namespaces from the bound grammar") {
  Env env = parse_env_string("A<:top,B<:top,X<:A,Y<:B");
  REQUIRE(env.entries().size() == 4);
  for (const Binding& b : env.entries()) CHECK(b.kind == BindKind::QualVar);
  Env env2 = parse_env_string("X<:Top, f:{top} Top");
  REQUIRE(env2.entries().size() == 2);
  CHECK(env2.entries()[0].kind == BindKind::TypeVar);
  CHECK(env2.entries()[1].kind == BindKind::TermVar);
}

TEST_CASE("fc application parses as three arguments") {
  ParseOptions fc{Calculus::Fc, std::nullopt};
  TermPtr t = parse_term("(fn[bot](x <: top : Top) => x) [{bot}] (fn[bot](y <: top : Top) => y)", fc);
  CHECK(term_as<ECApp>(t));
  // plain juxtaposition is rejected in fc
  CHECK_THROWS_AS(parse_term("(fn[bot](x <: top : Top) => x) (fn[bot](y <: top : Top) => y)", fc),
                  TypeError);
  // chains associate left
  TermPtr chain = parse_term(
      "(fn[bot](x <: top : Top) => x) [{bot}] (fn[bot](y <: top : Top) => y) [{top}]"
      " (fn[bot](z <: top : Top) => z)",
      fc);
  auto* outer = term_as<ECApp>(chain);
  REQUIRE(outer);
  CHECK(term_as<ECApp>(outer->fn));
}

TEST_CASE("application, postfix, and prefix interplay") {
  TermPtr t = parse_term("f a b", ParseOptions{Calculus::Fq, std::nullopt});
  auto* outer = term_as<EApp>(t);
  REQUIRE(outer);
  CHECK(term_as<EApp>(outer->fn));
  TermPtr t2 = parse_term("f (a b)");
  auto* o2 = term_as<EApp>(t2);
  REQUIRE(o2);
  CHECK(term_as<EVar>(o2->fn));
  TermPtr up = parse_term("upqual top f x");
  auto* app = term_as<EApp>(up);
  REQUIRE(app);
  CHECK(term_as<EUpqual>(app->fn));
  ParseOptions fm{Calculus::Fm, std::nullopt};
  TermPtr asg = parse_term("!r := f x", fm);
  auto* a = term_as<EAssign>(asg);
  REQUIRE(a);
  CHECK(term_as<EDeref>(a->target));
  CHECK(term_as<EApp>(a->value));
}

TEST_CASE("generated programs round-trip through print and parse") {
  for (Calculus calc : {Calculus::Fq, Calculus::Fm, Calculus::Fa, Calculus::Fc}) {
    Rng rng(321);
    ParseOptions opts;
    opts.calculus = calc;
    for (int i = 0; i < 40; ++i) {
      TermPtr t = gen_well_typed_term(rng, calc, two_point(), 3);
      std::string printed = print_term(t);
      TermPtr back = parse_term(printed, opts);
      CHECK(alpha_eq_term(back, t));
      CHECK(print_term(back) == printed);
    }
  }
}

TEST_CASE("same seed, same programs") {
  Rng a(2024), b(2024);
  for (int i = 0; i < 10; ++i) {
    TermPtr ta = gen_well_typed_term(a, Calculus::Fq, two_point(), 4);
    TermPtr tb = gen_well_typed_term(b, Calculus::Fq, two_point(), 4);
    CHECK(print_term(ta) == print_term(tb));
  }
}
