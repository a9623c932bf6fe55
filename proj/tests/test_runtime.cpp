#include "doctest.h"

#include "rwc/oracle.hpp"
#include "rwc/parser.hpp"
#include "rwc/planner.hpp"
#include "rwc/postprocess.hpp"
#include "rwc/preprocess.hpp"
#include "rwc/runtime.hpp"
#include "rwc/term_io.hpp"

using namespace rwc;

namespace {

struct Compiled {
    CollectResult collected;
    Program program;
};

Compiled compile_text(const std::string & text, PostprocessOptions post = {})
{
    ModuleLoader loader({});
    ModuleDef m = parse_module(text);
    loader.add_module(m);
    Compiled c;
    c.collected = collect_functions(m.name, loader);
    std::vector<FunctionUnit> units;
    for (const FunctionUnit & u : c.collected.units)
        units.push_back(u.is_constructor_unit ? u : preprocess_unit(u, c.collected.signature));
    c.program = link_program(units, c.collected.signature);
    postprocess(c.program, post);
    return c;
}

Term church(TermStore & store, uint64_t n)
{
    SymbolId z = store.intern_symbol("z", 0);
    SymbolId s = store.intern_symbol("s", 1);
    Term t = store.make_app(z, {});
    for (uint64_t i = 0; i < n; i++) t = store.make_app(s, {t});
    return t;
}

uint64_t church_value(TermStore & store, Term t)
{
    uint64_t n = 0;
    while (store.kind(t) == TermKind::Application && store.symbol(store.app_symbol(t)).name == "s") {
        n++;
        t = store.app_arg(t, 0);
    }
    REQUIRE(store.symbol(store.app_symbol(t)).name == "z");
    return n;
}

const char * kTypeEnv = R"(
module Type-environment
signature
  nil-type       {constructor};
  pair(_,_)      {constructor};
  type-env(_)    {constructor};
  int            {constructor};
  bool           {constructor};
  id1            {constructor};
  id2            {constructor};
  id3            {constructor};
  lookup(_,_);
  add-to(_,_,_)
rules

[l-1]  lookup(Id,type-env(conc(*Pair1,conc(pair(Id,Type),*Pair2))))
              = Type;

[l-2]  default: lookup(Id,Tenv)
              = nil-type;

[at-1] add-to(Id,Type1,type-env(conc(pair(Id,Type2),*Pair1)))
              = type-env(conc(pair(Id,Type1),*Pair1));

[at-2] Id1 != Id2 &
       add-to(Id1,Type1,type-env(*Pair1)) == type-env(*Pair2)
         ==>
       add-to(Id1,Type1,type-env(conc(pair(Id2,Type2),*Pair1)))
              = type-env(conc(pair(Id2,Type2),*Pair2));

[at-3] add-to(Id,Type,type-env(null))
              = type-env(list(pair(Id,Type)))
)";

const char * kNat = R"(
module Nat
signature
  z {constructor}; s(_) {constructor};
  plus(_,_);
  modsum(_,_);
  trim(_);
  f(_)
rules
[p-1] plus(z,N) = N;
[p-2] plus(s(M),N) = s(plus(M,N));
[m-1] modsum(M,N) = trim(plus(M,N));
[t-1] trim(s(s(s(s(s(s(s(s(s(s(s(s(s(s(s(s(s(X)))))))))))))))))) = trim(X);
[t-2] default: trim(X) = X;
[f-1] f(z) = s(z);
[f-2] f(s(N)) = modsum(f(N),f(N))
)";

const char * kCount = R"(
module Count
signature
  z {constructor}; s(_) {constructor};
  count(_)
rules
[c-1] count(z) = z;
[c-2] count(s(N)) = count(N)
)";

} // namespace

TEST_CASE("constructor automaton rewrites and falls through")
{
    Compiled c = compile_text(R"(
module Neg
signature
  tt {constructor}; ff {constructor}; other {constructor};
  neg(_)
rules
[n-1] neg(tt) = ff;
[n-2] neg(ff) = tt
)");
    TermStore store;
    Runtime rt(store, c.program);
    CHECK(print_term(store, rt.normalize(parse_term(store, "neg(tt)"))) == "ff");
    CHECK(print_term(store, rt.normalize(parse_term(store, "neg(neg(tt))"))) == "tt");
    // no rule applies: the application is its own normal form
    CHECK(print_term(store, rt.normalize(parse_term(store, "neg(other)"))) == "neg(other)");
}

TEST_CASE("type environment matches the reference interpreter")
{
    Compiled c = compile_text(kTypeEnv);
    TermStore store;
    Runtime rt(store, c.program);
    Oracle oracle(store, c.collected);

    const char * inputs[] = {
        "lookup(id1,type-env([pair(id1,int)]))",
        "lookup(id2,type-env([pair(id1,int),pair(id2,bool)]))",
        "lookup(id3,type-env([pair(id1,int),pair(id2,bool)]))",
        "lookup(id1,type-env([pair(id1,int),pair(id1,bool)]))",
        "lookup(id1,type-env([]))",
        "add-to(id1,int,type-env([]))",
        "add-to(id1,int,type-env([pair(id1,bool)]))",
        "add-to(id1,int,type-env([pair(id2,bool)]))",
        "add-to(id3,bool,type-env([pair(id1,int),pair(id2,bool)]))",
        "add-to(id2,int,type-env([pair(id1,int),pair(id2,bool),pair(id3,int)]))",
        "lookup(id2,add-to(id2,bool,add-to(id1,int,type-env([]))))",
        "add-to(id1,bool,add-to(id2,int,add-to(id1,int,type-env([]))))",
    };
    for (const char * in : inputs) {
        CAPTURE(in);
        Term t = parse_term(store, in);
        Term got = rt.normalize(t);
        Term want = oracle.normalize(t);
        CHECK(store.term_equal(got, want));
        CHECK(!oracle.has_redex(got));
    }
}

TEST_CASE("results agree with the oracle without sharing")
{
    Compiled c = compile_text(kTypeEnv);
    TermStore shared;
    Runtime rt_shared(shared, c.program);
    TermStore plain(false);
    Runtime rt_plain(plain, c.program);
    const char * inputs[] = {
        "add-to(id1,int,type-env([pair(id2,bool),pair(id1,bool)]))",
        "lookup(id1,type-env([pair(id2,bool),pair(id1,int)]))",
    };
    for (const char * in : inputs) {
        Term a = rt_shared.normalize(parse_term(shared, in));
        Term b = rt_plain.normalize(parse_term(plain, in));
        CHECK(print_term(shared, a) == print_term(plain, b));
    }
}

TEST_CASE("modular exponentiation residues")
{
    Compiled c = compile_text(kNat);
    TermStore store;
    Runtime rt(store, c.program);
    SymbolId f = store.intern_symbol("f", 1);
    auto residue = [&](uint64_t n) {
        return church_value(store, rt.normalize(store.make_app(f, {church(store, n)})));
    };
    CHECK(residue(0) == 1);
    CHECK(residue(4) == 16);
    CHECK(residue(17) == 2);
    CHECK(residue(20) == 16);
    CHECK(residue(23) == 9);

    // spot-check against the oracle on a small value
    Oracle oracle(store, c.collected);
    Term t = store.make_app(f, {church(store, 6)});
    CHECK(store.term_equal(rt.normalize(t), oracle.normalize(t)));
}

TEST_CASE("tail recursion runs deep inputs in bounded frames")
{
    Compiled c = compile_text(kCount);
    TermStore store;
    Runtime rt(store, c.program);
    SymbolId count = store.intern_symbol("count", 1);
    const uint64_t n = 200'000;
    Term t = store.make_app(count, {church(store, n)});
    Term r = rt.normalize(t);
    CHECK(print_term(store, r) == "z");
    CHECK(rt.stats().max_frame_depth <= 4);
    CHECK(rt.stats().rule_applications == n + 1);
}

TEST_CASE("without tail recursion elimination the depth limit trips")
{
    Compiled c = compile_text(kCount, PostprocessOptions{false, true});
    TermStore store;
    RunConfig cfg;
    cfg.depth_limit = 1000;
    Runtime rt(store, c.program, cfg);
    SymbolId count = store.intern_symbol("count", 1);
    CHECK_THROWS_AS(rt.normalize(store.make_app(count, {church(store, 5000)})), ResourceError);
    // shallow inputs still work
    Runtime rt2(store, c.program, cfg);
    CHECK(print_term(store, rt2.normalize(store.make_app(count, {church(store, 900)}))) == "z");
}

TEST_CASE("memoization collapses repeated calls")
{
    Compiled memoized = compile_text(R"(
module NatM
signature
  z {constructor}; s(_) {constructor};
  plus(_,_);
  modsum(_,_);
  trim(_);
  f(_) {memo}
rules
[p-1] plus(z,N) = N;
[p-2] plus(s(M),N) = s(plus(M,N));
[m-1] modsum(M,N) = trim(plus(M,N));
[t-1] trim(s(s(s(s(s(s(s(s(s(s(s(s(s(s(s(s(s(X)))))))))))))))))) = trim(X);
[t-2] default: trim(X) = X;
[f-1] f(z) = s(z);
[f-2] f(s(N)) = modsum(f(N),f(N))
)");
    const uint64_t n = 16;
    TermStore s1;
    Runtime r1(s1, memoized.program);
    Term v1 = r1.normalize(s1.make_app(s1.intern_symbol("f", 1), {church(s1, n)}));
    CHECK(church_value(s1, v1) == 1); // 2^16 mod 17
    CHECK(r1.stats().memo_hits >= n);

    RunConfig off;
    off.memo_enabled = false;
    TermStore s2;
    Runtime r2(s2, memoized.program, off);
    Term v2 = r2.normalize(s2.make_app(s2.intern_symbol("f", 1), {church(s2, n)}));
    CHECK(church_value(s2, v2) == 1);
    CHECK(r2.stats().memo_hits == 0);
    CHECK(r2.stats().plan_calls > r1.stats().plan_calls * 10);

    // without sharing, memoization is automatically disabled
    TermStore s3(false);
    Runtime r3(s3, memoized.program);
    CHECK(church_value(s3, r3.normalize(s3.make_app(s3.intern_symbol("f", 1),
                                                    {church(s3, 10)})))
          == 4); // 2^10 mod 17
    CHECK(r3.stats().memo_hits == 0);
}

TEST_CASE("memoization is observationally transparent")
{
    Compiled c = compile_text(kNat);
    Compiled m = compile_text(R"(
module NatM
signature
  z {constructor}; s(_) {constructor};
  plus(_,_);
  modsum(_,_);
  trim(_);
  f(_) {memo}
rules
[p-1] plus(z,N) = N;
[p-2] plus(s(M),N) = s(plus(M,N));
[m-1] modsum(M,N) = trim(plus(M,N));
[t-1] trim(s(s(s(s(s(s(s(s(s(s(s(s(s(s(s(s(s(X)))))))))))))))))) = trim(X);
[t-2] default: trim(X) = X;
[f-1] f(z) = s(z);
[f-2] f(s(N)) = modsum(f(N),f(N))
)");
    TermStore store;
    Runtime plainrt(store, c.program);
    Runtime memort(store, m.program);
    SymbolId f = store.intern_symbol("f", 1);
    for (uint64_t n : {0, 3, 9, 14}) {
        Term t = store.make_app(f, {church(store, n)});
        CHECK(store.term_equal(plainrt.normalize(t), memort.normalize(t)));
    }
}

TEST_CASE("constant caching evaluates a ground call once")
{
    const char * mod = R"(
module K
signature
  a {constructor}; k(_) {constructor}; pairc(_,_) {constructor};
  z {constructor}; s(_) {constructor};
  h(_);
  g(_)
rules
[h-1] h(X) = k(X);
[g-1] g(X) = pairc(h(a),X)
)";
    Compiled c = compile_text(mod);
    REQUIRE(c.program.constants.size() == 1);

    TermStore store;
    Runtime rt(store, c.program);
    SymbolId g = store.intern_symbol("g", 1);
    for (uint64_t i = 0; i < 100; i++) {
        Term r = rt.normalize(store.make_app(g, {church(store, i)}));
        CHECK(store.kind(r) == TermKind::Application);
    }
    CHECK(rt.stats().const_cache_misses == 1);
    CHECK(rt.stats().const_cache_hits == 99);

    RunConfig off;
    off.const_cache_enabled = false;
    TermStore store2;
    Runtime rt2(store2, c.program, off);
    for (uint64_t i = 0; i < 100; i++)
        rt2.normalize(store2.make_app(store2.intern_symbol("g", 1), {church(store2, i)}));
    CHECK(rt2.stats().const_cache_misses == 100);
    CHECK(rt2.stats().const_cache_hits == 0);
}

TEST_CASE("delayed arguments are not evaluated until used")
{
    Compiled c = compile_text(R"(
module D
signature
  z {constructor}; s(_) {constructor}; a {constructor};
  if2(_,_,_) {delay(1,2)};
  bomb(_);
  check(_)
rules
[i-1] if2(z,X,Y) = X;
[i-2] if2(s(C),X,Y) = Y;
[b-1] bomb(X) = s(bomb(X));
[c-1] check(C) = if2(C,a,bomb(z))
)");
    TermStore store;
    RunConfig cfg;
    cfg.depth_limit = 2000;
    Runtime rt(store, c.program, cfg);
    // the untaken bomb branch is never evaluated
    CHECK(print_term(store, rt.normalize(parse_term(store, "check(z)"))) == "a");
    // the taken branch is evaluated on use and diverges
    CHECK_THROWS_AS(rt.normalize(parse_term(store, "check(s(z))")), ResourceError);
}

TEST_CASE("list suffixes are shared when the head is replaced")
{
    Compiled c = compile_text(kTypeEnv);
    TermStore store;
    Runtime rt(store, c.program);

    std::string env = "type-env([pair(id1,int)";
    for (int i = 0; i < 100; i++) env += ",pair(id2,int)";
    env += "])";
    Term base = parse_term(store, env);
    Rooted keep(store, base);
    uint64_t before = store.stats().unique_nodes;
    SymbolId add_to = store.intern_symbol("add-to", 3);
    Term q = store.make_app(add_to, {store.make_constant("id1"), store.make_constant("bool"), base});
    Term r = rt.normalize(q);
    uint64_t after = store.stats().unique_nodes;
    CHECK(print_term(store, r).substr(0, 24) == "type-env([pair(id1,bool)");
    // the 100-element tail is reused, only a handful of new nodes appear
    CHECK(after - before < 20);
}

TEST_CASE("repeated normalization of the same term is cached")
{
    Compiled c = compile_text(kNat);
    TermStore store;
    Runtime rt(store, c.program);
    SymbolId f = store.intern_symbol("f", 1);
    Term t = store.make_app(f, {church(store, 12)});
    Term r1 = rt.normalize(t);
    uint64_t calls = rt.stats().plan_calls;
    Term r2 = rt.normalize(t);
    CHECK(store.term_equal(r1, r2));
    CHECK(rt.stats().plan_calls == calls);

    rt.clear_caches();
    rt.normalize(t);
    CHECK(rt.stats().plan_calls > calls);
}

TEST_CASE("list backtracking agrees with the oracle")
{
    Compiled c = compile_text(R"(
module Set
signature
  set(_) {constructor};
  a {constructor}; b {constructor}; cc {constructor};
  mkset(_)
rules
[s-1] mkset(set(conc(*E1,conc(El,conc(*E2,conc(El,*E3))))))
        = mkset(set(conc(*E1,conc(El,conc(*E2,*E3)))));
[s-2] default: mkset(S) = S
)");
    TermStore store;
    Runtime rt(store, c.program);
    Oracle oracle(store, c.collected);
    const char * inputs[] = {
        "mkset(set([a,b,a,cc,b]))",
        "mkset(set([a,a,a,a]))",
        "mkset(set([a,b,cc]))",
        "mkset(set([]))",
    };
    for (const char * in : inputs) {
        CAPTURE(in);
        Term t = parse_term(store, in);
        CHECK(store.term_equal(rt.normalize(t), oracle.normalize(t)));
    }
    CHECK(print_term(store, rt.normalize(parse_term(store, "mkset(set([a,b,a,cc,b]))")))
          == "set([a,b,cc])");
}

TEST_CASE("deeply nested input terms are normalized iteratively")
{
    Compiled c = compile_text(kCount);
    TermStore store;
    Runtime rt(store, c.program);
    // a million levels of constructors in the input term
    Term t = church(store, 1'000'000);
    Term r = rt.normalize(t);
    CHECK(store.term_equal(r, t));
}
