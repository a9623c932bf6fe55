/* End-to-end acceptance suite.  Each criterion prints one PASS/FAIL line;
   the process exits nonzero if any criterion fails. */

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "rwc/bench.hpp"
#include "rwc/oracle.hpp"
#include "rwc/program_io.hpp"
#include "rwc/term_io.hpp"

using namespace rwc;

namespace {

int failures = 0;

void report(const char * name, bool ok, const std::string & detail = "")
{
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n" << std::flush;
    if (!ok) failures++;
}

std::vector<std::string> corpus_path() { return {RWC_CORPUS_DIR}; }

CollectResult collect_corpus(const std::string & module)
{
    ModuleLoader loader(corpus_path());
    return collect_functions(module, loader);
}

ProgramArtifact build_artifact(const CollectResult & collected)
{
    ProgramArtifact art;
    art.signature = collected.signature;
    PlannerOptions popts;
    for (const FunctionUnit & u : collected.units) {
        if (u.is_constructor_unit) {
            for (const SymbolDecl & d : u.symbols) art.constructors.push_back(d);
            continue;
        }
        FunctionUnit pu = preprocess_unit(u, collected.signature);
        CompiledUnit cu;
        cu.key = u.name + "/" + std::to_string(u.arity);
        cu.fingerprint = unit_fingerprint(pu, popts);
        cu.plan = compile_unit(pu, collected.signature, popts);
        art.units.push_back(std::move(cu));
    }
    return art;
}

Term church(TermStore & store, uint64_t n)
{
    SymbolId z = store.intern_symbol("z", 0);
    SymbolId s = store.intern_symbol("s", 1);
    Term t = store.make_app(z, {});
    for (uint64_t i = 0; i < n; i++) t = store.make_app(s, {t});
    return t;
}

// ---------------------------------------------------------------- criterion 1

bool oracle_equivalence(std::string & detail)
{
    const char * modules[] = {"Type-environment", "Set", "Nat",
                              "evalsym", "evalexp", "evaltree"};
    const int kInputsPerFunction = 1000;
    std::mt19937 rng(20260823);
    uint64_t compared = 0;

    for (const char * module : modules) {
        CollectResult collected = collect_corpus(module);
        ProgramArtifact art = build_artifact(collected);

        TermStore ostore;
        Oracle oracle(ostore, collected);
        struct Sample {
            std::string input, nf;
        };
        std::vector<Sample> samples;
        for (const FunctionUnit & u : collected.units) {
            if (u.is_constructor_unit) continue;
            SymbolId fn = ostore.intern_symbol(u.name, u.arity);
            for (int i = 0; i < kInputsPerFunction; i++) {
                std::vector<Term> args;
                for (uint32_t a = 0; a < u.arity; a++)
                    args.push_back(random_ground_term(ostore, collected.signature, rng));
                Term input = ostore.make_app(fn, args);
                Term nf = oracle.normalize(input);
                samples.push_back({print_term(ostore, input), print_term(ostore, nf)});
            }
        }

        for (int tre = 0; tre < 2; tre++)
            for (int cc = 0; cc < 2; cc++)
                for (int memo = 0; memo < 2; memo++) {
                    PostprocessOptions post;
                    post.tail_recursion = tre;
                    post.const_cache = cc;
                    Program prog = assemble_program(art, post);
                    if (memo)
                        for (RewritePlan & p : prog.plans) p.memo = true;
                    for (int sharing = 0; sharing < 2; sharing++) {
                        TermStore store(sharing);
                        RunConfig rc;
                        rc.memo_enabled = memo;
                        rc.const_cache_enabled = cc;
                        Runtime rt(store, prog, rc);
                        for (const Sample & s : samples) {
                            Term in = parse_term(store, s.input);
                            std::string got = print_term(store, rt.normalize(in));
                            if (got != s.nf) {
                                detail = std::string(module) + " " + s.input + " -> " + got
                                    + " wanted " + s.nf + " [sharing=" + std::to_string(sharing)
                                    + " tre=" + std::to_string(tre) + " cc=" + std::to_string(cc)
                                    + " memo=" + std::to_string(memo) + "]";
                                return false;
                            }
                            compared++;
                        }
                    }
                }
    }
    detail = std::to_string(compared) + " comparisons";
    return true;
}

// ---------------------------------------------------------------- criterion 2

Rule ext_rule(const std::string & text)
{
    ParseOptions ext;
    ext.allow_extended = true;
    return parse_rule(text, ext);
}

Rule corpus_rule(const ModuleDef & m, const std::string & label)
{
    for (const Rule & r : m.rules)
        if (r.label == label) return r;
    throw Error("no rule " + label);
}

bool preprocessor_goldens(std::string & detail)
{
    ModuleLoader loader(corpus_path());
    const ModuleDef & env = loader.load("Type-environment");
    Signature sig;
    for (const SymbolDecl & d : env.signature) sig.add(d);

    auto fail = [&](const char * which) {
        detail = std::string("mismatch at ") + which;
        return false;
    };

    // linearization of [at-1]
    Rule at1p = linearize(corpus_rule(env, "at-1"), sig);
    if (!rule_alpha_equal(
            at1p,
            ext_rule("Id == Id1 ==>"
                     " add-to(Id,Type1,type-env(conc(pair(Id1,Type2),*Pair1)))"
                     " = type-env(conc(pair(Id,Type1),*Pair1))")))
        return fail("at-1'");

    // assignment introduction in [at-2]
    Rule at2p = introduce_assignments(linearize(corpus_rule(env, "at-2"), sig));
    if (!rule_alpha_equal(
            at2p,
            ext_rule("Id1 != Id2 &"
                     " type-env(*Pair2) := add-to(Id1,Type1,type-env(*Pair1)) ==>"
                     " add-to(Id1,Type1,type-env(conc(pair(Id2,Type2),*Pair1)))"
                     " = type-env(conc(pair(Id2,Type2),*Pair2))")))
        return fail("at-2'");

    // hoisting of the complex list element out of [at-1']
    Rule at1pp = simplify_list_elements(
        simplify_assignment_patterns(
            eliminate_constructor_args(introduce_assignments(at1p), sig)),
        sig);
    if (!rule_alpha_equal(
            at1pp,
            ext_rule("pair(Id1,Type2) := P & Id == Id1 ==>"
                     " add-to(Id,Type1,type-env(conc(P,*Pair1)))"
                     " = type-env(conc(pair(Id,Type1),*Pair1))")))
        return fail("at-1''");

    // the single-list-variable pattern becomes an accessor chain
    Rule at1ppp = simplify_list_patterns(at1pp, sig);
    Rule golden_at1ppp = ext_rule(
        "t := not_empty_list(*Pair) &"
        " P := list_head(*Pair) &"
        " *Pair1 := list_tail(*Pair) &"
        " pair(Id1,Type2) := P &"
        " Id == Id1 ==>"
        " add-to(Id,Type1,type-env(*Pair))"
        " = type-env(conc(pair(Id,Type1),*Pair1))");
    if (!rule_alpha_equal(at1ppp, golden_at1ppp)) return fail("at-1'''");

    // combination of [at-1'''] and [at-2''']
    Rule at2ppp = simplify_list_patterns(
        simplify_list_elements(
            simplify_assignment_patterns(eliminate_constructor_args(at2p, sig)), sig),
        sig);
    FunctionUnit u;
    u.name = "add-to";
    u.arity = 3;
    u.symbols = {{"add-to", 3, false, false, {}, 0}};
    u.rules = {at1ppp, at2ppp};
    FunctionUnit combined = combine_rules(u);
    if (combined.rules.size() != 1) return fail("at-1-2 (rule count)");
    if (!rule_alpha_equal(
            combined.rules[0],
            ext_rule("t := not_empty_list(*Pair) &"
                     " P := list_head(*Pair) &"
                     " *Pair1 := list_tail(*Pair) &"
                     " pair(Id1,Type2) := P ==>"
                     " add-to(Id,Type1,type-env(*Pair)) =\n"
                     "{ Id == Id1 ==> type-env(conc(pair(Id,Type1),*Pair1));\n"
                     "  Id != Id1 &"
                     "  type-env(*Pair2) := add-to(Id,Type1,type-env(*Pair1)) ==>"
                     "  type-env(conc(pair(Id1,Type2),*Pair2)) }")))
        return fail("at-1-2");

    // complementary guards merge into else
    FunctionUnit with_else = introduce_else(combined);
    if (with_else.rules.size() != 1) return fail("at-1-2' (rule count)");
    if (!rule_alpha_equal(
            with_else.rules[0],
            ext_rule("t := not_empty_list(*Pair) &"
                     " P := list_head(*Pair) &"
                     " *Pair1 := list_tail(*Pair) &"
                     " pair(Id1,Type2) := P ==>"
                     " add-to(Id,Type1,type-env(*Pair)) =\n"
                     "{ Id == Id1 ==> type-env(conc(pair(Id,Type1),*Pair1))\n"
                     "  else\n"
                     "  { type-env(*Pair2) := add-to(Id,Type1,type-env(*Pair1)) ==>"
                     "    type-env(conc(pair(Id1,Type2),*Pair2)) }\n"
                     "}")))
        return fail("at-1-2'");

    // linearization of the set rule
    Signature setsig;
    setsig.add({"set", 1, false, false, {}, 0});
    Rule s1 = parse_rule(
        "[s-1] set(conc(*Id0,conc(Id,conc(*Id1,conc(Id,*Id2)))))"
        " = set(conc(*Id0,conc(Id,conc(*Id1,*Id2))))");
    if (!rule_alpha_equal(
            linearize(s1, setsig),
            ext_rule("Id == Id3 ==>"
                     " set(conc(*Id0,conc(Id,conc(*Id1,conc(Id3,*Id2)))))"
                     " = set(conc(*Id0,conc(Id,conc(*Id1,*Id2))))")))
        return fail("s-1'");

    detail = "7 golden forms";
    return true;
}

// ---------------------------------------------------------------- criterion 3

bool automaton_shape(std::string & detail)
{
    ModuleDef m = parse_module(R"(
module Autom
signature
  a {constructor}; b {constructor}; c {constructor}; d {constructor};
  g(_);
  f(_,_,_)
rules
[r-1] f(a,b,c) = g(a);
[r-2] f(X,b,d) = g(X)
)");
    ModuleLoader loader({});
    loader.add_module(m);
    CollectResult collected = collect_functions("Autom", loader);
    std::vector<FunctionUnit> units;
    for (const FunctionUnit & u : collected.units)
        units.push_back(u.is_constructor_unit ? u : preprocess_unit(u, collected.signature));
    Program prog = link_program(units, collected.signature);
    PostprocessOptions post;
    post.const_cache = false;
    postprocess(prog, post);

    const RewritePlan & f = prog.plans[prog.plan_index.at("f/3")];
    const char * expected = R"((plan f/3 frame 3
  (alt
    (check-sym s0 a/0)
    (check-sym s1 b/0)
    (check-sym s2 c/0)
    (return (make g/1 (make a/0)))
    (check-sym s1 b/0)
    (check-sym s2 d/0)
    (return (make g/1 s0))
    (fallthrough)
  )
)
)";
    if (print_plan(f) != expected) {
        detail = "plan snapshot mismatch:\n" + print_plan(f);
        return false;
    }
    // the first alternative starts with an argument-0 test, the last is the
    // normal-form fallthrough
    const PlanNode & root = *f.root;
    if (root.kind != NodeKind::Alt || root.children.front()->slot_a != 0
        || root.children.back()->kind != NodeKind::Fallthrough) {
        detail = "structural check failed";
        return false;
    }

    // specificity: most specific rule first, default last
    std::vector<Rule> rules = {
        parse_rule("[o-1] h(X) = X"),
        parse_rule("[o-2] default: h(X) = X"),
        parse_rule("[o-3] h(s(s(X))) = X"),
    };
    std::vector<Rule> ordered = order_rules(rules);
    if (ordered[0].label != "o-3" || ordered[2].label != "o-2") {
        detail = "specificity order wrong: " + ordered[0].label + "," + ordered[1].label + ","
            + ordered[2].label;
        return false;
    }
    return true;
}

// ------------------------------------------------------------- criteria 4 & 5

std::vector<BenchRow> run_sweep()
{
    std::vector<BenchRow> rows;
    for (const char * b : {"evalsym", "evalexp", "evaltree"})
        for (uint32_t n = 17; n <= 23; n++)
            for (bool sharing : {true, false}) {
                BenchConfig cfg;
                cfg.benchmark = b;
                cfg.n = n;
                cfg.sharing = sharing;
                cfg.search_path = corpus_path();
                rows.push_back(run_bench_cell(cfg));
                const BenchRow & r = rows.back();
                std::cerr << "  " << bench_csv_row(r) << "\n";
            }
    return rows;
}

const BenchRow * find_row(const std::vector<BenchRow> & rows, const std::string & b,
                          uint32_t n, bool sharing)
{
    for (const BenchRow & r : rows)
        if (r.benchmark == b && r.n == n && r.sharing == sharing) return &r;
    return nullptr;
}

bool sharing_effectiveness(const std::vector<BenchRow> & rows, std::string & detail)
{
    const BenchRow * on20 = find_row(rows, "evaltree", 20, true);
    const BenchRow * off20 = find_row(rows, "evaltree", 20, false);
    const BenchRow * on21 = find_row(rows, "evaltree", 21, true);
    if (!on20 || !off20 || !on21) {
        detail = "missing rows";
        return false;
    }
    if (on20->status != "ok" || on21->status != "ok") {
        detail = "sharing=on cell did not finish";
        return false;
    }
    if (off20->status != "ok") {
        detail = "sharing=off n=20 did not finish, no baseline";
        return false;
    }
    if (on20->peak_unique_nodes * 5 > off20->peak_total_nodes) {
        detail = "peak_unique(on) > 20% of peak_total(off) at n=20";
        return false;
    }
    bool reduces_nodes = on20->peak_unique_nodes < off20->peak_unique_nodes;
    bool reduces_time = on20->wall_ms < off20->wall_ms;
    if (!reduces_nodes || !reduces_time) {
        detail = "sharing did not reduce both nodes and wall time at n=20";
        return false;
    }
    std::ostringstream os;
    os << "n=20 unique(on)=" << on20->peak_unique_nodes
       << " total(off)=" << off20->peak_total_nodes << ", n=21 on ok";
    detail = os.str();
    return true;
}

bool benchmark_residues(const std::vector<BenchRow> & rows, std::string & detail)
{
    int completed = 0, dnf = 0;
    for (const BenchRow & r : rows) {
        if (r.status != "ok") {
            dnf++;
            continue;
        }
        completed++;
        if (r.residue != expected_residue(r.n)) {
            detail = bench_csv_row(r) + " expected " + std::to_string(expected_residue(r.n));
            return false;
        }
    }
    detail = std::to_string(completed) + " completed, " + std::to_string(dnf) + " dnf";
    return completed > 0;
}

// ---------------------------------------------------------------- criterion 6

double time_equal(const TermStore & store, Term a, Term b, uint64_t reps)
{
    volatile bool sink = false;
    auto start = std::chrono::steady_clock::now();
    for (uint64_t i = 0; i < reps; i++) sink = sink ^ store.term_equal(a, b);
    auto elapsed = std::chrono::steady_clock::now() - start;
    (void)sink;
    return std::chrono::duration<double, std::nano>(elapsed).count() / double(reps);
}

bool term_equal_cost(std::string & detail)
{
    // sharing on: identity check, size-independent
    TermStore shared(true);
    Term small_a = church(shared, 100), small_b = church(shared, 100);
    Term big_a = church(shared, 100'000), big_b = church(shared, 100'000);
    double t_small = time_equal(shared, small_a, small_b, 4'000'000);
    double t_big = time_equal(shared, big_a, big_b, 4'000'000);
    double ratio = t_big / t_small;
    if (ratio > 3.0 || ratio < 1.0 / 3.0) {
        detail = "sharing-on ratio " + std::to_string(ratio);
        return false;
    }

    // sharing off: structural walk, grows with size across three decades
    TermStore plain(false);
    std::vector<double> means;
    for (uint64_t size : {100u, 1000u, 10000u, 100000u}) {
        Term a = church(plain, size), b = church(plain, size);
        means.push_back(time_equal(plain, a, b, 40'000'000 / size));
    }
    for (size_t i = 1; i < means.size(); i++)
        if (means[i] <= means[i - 1]) {
            detail = "sharing-off not monotone: " + std::to_string(means[i - 1]) + " -> "
                + std::to_string(means[i]) + " ns at decade " + std::to_string(i);
            return false;
        }
    std::ostringstream os;
    os.precision(3);
    os << "on ratio " << ratio << "; off ns/op " << means[0] << " " << means[1] << " "
       << means[2] << " " << means[3];
    detail = os.str();
    return true;
}

// ---------------------------------------------------------------- criterion 7

bool tail_recursion(std::string & detail)
{
    ModuleDef m = parse_module(R"(
module Countdown
signature
  z {constructor}; s(_) {constructor};
  count(_)
rules
[c-1] count(z) = z;
[c-2] count(s(N)) = count(N)
)");
    ModuleLoader loader({});
    loader.add_module(m);
    CollectResult collected = collect_functions("Countdown", loader);
    ProgramArtifact art = build_artifact(collected);
    const uint64_t n = 1'000'000;

    Program with_tre = assemble_program(art);
    TermStore store1;
    Runtime rt1(store1, with_tre);
    SymbolId count1 = store1.intern_symbol("count", 1);
    Term r = rt1.normalize(store1.make_app(count1, {church(store1, n)}));
    if (print_term(store1, r) != "z") {
        detail = "wrong normal form";
        return false;
    }
    if (rt1.stats().max_frame_depth > 10) {
        detail = "frame depth " + std::to_string(rt1.stats().max_frame_depth) + " with TRE";
        return false;
    }

    PostprocessOptions no_tre;
    no_tre.tail_recursion = false;
    Program without = assemble_program(art, no_tre);
    TermStore store2;
    RunConfig rc;
    rc.depth_limit = n;
    Runtime rt2(store2, without, rc);
    SymbolId count2 = store2.intern_symbol("count", 1);
    bool exhausted = false;
    try {
        rt2.normalize(store2.make_app(count2, {church(store2, n)}));
    } catch (const ResourceError &) {
        exhausted = true;
    }
    std::ostringstream os;
    os << "frame depth " << rt1.stats().max_frame_depth << " with TRE; without TRE "
       << (exhausted ? "exhausted the depth limit" : "completed");
    detail = os.str();
    return true;
}

// ---------------------------------------------------------------- criterion 8

bool constant_caching(std::string & detail)
{
    ModuleDef m = parse_module(R"(
module Constcache
signature
  a {constructor}; b {constructor};
  z {constructor}; s(_) {constructor};
  pairc(_,_) {constructor};
  h(_);
  g(_)
rules
[h-1] h(a) = b;
[g-1] g(X) = pairc(X,h(a))
)");
    ModuleLoader loader({});
    loader.add_module(m);
    CollectResult collected = collect_functions("Constcache", loader);
    ProgramArtifact art = build_artifact(collected);

    Program cached = assemble_program(art);
    TermStore store1;
    Runtime rt1(store1, cached);
    SymbolId g1 = store1.intern_symbol("g", 1);
    std::vector<std::string> nfs1;
    for (int i = 0; i < 100; i++)
        nfs1.push_back(print_term(store1, rt1.normalize(store1.make_app(g1, {church(store1, i)}))));
    if (rt1.stats().const_cache_misses != 1 || rt1.stats().const_cache_hits != 99) {
        detail = "misses=" + std::to_string(rt1.stats().const_cache_misses)
            + " hits=" + std::to_string(rt1.stats().const_cache_hits);
        return false;
    }

    PostprocessOptions no_cc;
    no_cc.const_cache = false;
    Program uncached = assemble_program(art, no_cc);
    TermStore store2;
    Runtime rt2(store2, uncached);
    SymbolId g2 = store2.intern_symbol("g", 1);
    for (int i = 0; i < 100; i++) {
        std::string nf =
            print_term(store2, rt2.normalize(store2.make_app(g2, {church(store2, i)})));
        if (nf != nfs1[i]) {
            detail = "normal form differs without const cache at input " + std::to_string(i);
            return false;
        }
    }
    detail = "1 evaluation, 99 hits; identical normal forms without the cache";
    return true;
}

// ---------------------------------------------------------------- criterion 9

bool memoization(std::string & detail)
{
    ModuleDef m = parse_module(R"(
module Memo
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
    ModuleLoader loader({});
    loader.add_module(m);
    CollectResult collected = collect_functions("Memo", loader);
    ProgramArtifact art = build_artifact(collected);
    Program prog = assemble_program(art);

    TermStore store;
    Runtime rt(store, prog);
    SymbolId f = store.intern_symbol("f", 1);
    Term arg = church(store, 16);
    Term first = rt.normalize(store.make_app(f, {arg}));
    if (rt.stats().memo_hits == 0) {
        detail = "no memo hits during the doubling recursion";
        return false;
    }
    uint64_t before = rt.stats().rule_applications;
    Term second = rt.normalize(store.make_app(f, {arg}));
    uint64_t delta = rt.stats().rule_applications - before;
    if (delta != 0 || second != first) {
        detail = std::to_string(delta) + " rule applications on the second call";
        return false;
    }

    // transparency: memoizing every function never changes a corpus normal form
    std::mt19937 rng(99);
    for (const char * module : {"Type-environment", "Set", "Nat", "evaltree"}) {
        CollectResult c = collect_corpus(module);
        ProgramArtifact a = build_artifact(c);
        Program plain = assemble_program(a);
        Program memod = assemble_program(a);
        for (RewritePlan & p : memod.plans) p.memo = true;
        TermStore s1, s2;
        Runtime r1(s1, plain), r2(s2, memod);
        for (const FunctionUnit & u : c.units) {
            if (u.is_constructor_unit) continue;
            for (int i = 0; i < 100; i++) {
                std::vector<Term> args;
                for (uint32_t k = 0; k < u.arity; k++)
                    args.push_back(random_ground_term(s1, c.signature, rng));
                Term in1 = s1.make_app(s1.intern_symbol(u.name, u.arity), args);
                std::string text = print_term(s1, in1);
                std::string nf1 = print_term(s1, r1.normalize(in1));
                std::string nf2 = print_term(s2, r2.normalize(parse_term(s2, text)));
                if (nf1 != nf2) {
                    detail = "memoization changed " + text;
                    return false;
                }
            }
        }
    }
    detail = "0 rule applications on repeat; transparent on the corpus";
    return true;
}

// --------------------------------------------------------------- criterion 10

bool store_properties(std::string & detail)
{
    // interning
    {
        TermStore store;
        SymbolId s = store.intern_symbol("s", 1);
        Term a = store.make_app(s, {store.make_constant("z")});
        Term b = store.make_app(s, {store.make_constant("z")});
        if (a != b) {
            detail = "structurally equal constructions got different identities";
            return false;
        }
    }

    // immutability
    {
        TermStore store;
        Term l = parse_term(store, "[a,b,c]");
        std::string before = print_term(store, l);
        Rooted keep(store, l);
        store.list_tail(l);
        store.cons(store.make_constant("d"), l);
        store.conc(l, l);
        store.list_prefix(l);
        if (print_term(store, l) != before) {
            detail = "list operations changed an existing term";
            return false;
        }
    }

    // reclamation against a reachability oracle on random construction logs
    std::mt19937 rng(4242);
    for (int log = 0; log < 100; log++) {
        TermStore store;
        SymbolId c0 = store.intern_symbol("c0", 0);
        SymbolId c1 = store.intern_symbol("c1", 1);
        SymbolId c2 = store.intern_symbol("c2", 2);
        std::vector<Term> created = {store.make_app(c0, {})};
        std::uniform_int_distribution<int> op(0, 9);
        auto pick = [&]() -> Term {
            std::uniform_int_distribution<size_t> d(0, created.size() - 1);
            return created[d(rng)];
        };
        for (int step = 0; step < 60; step++) {
            switch (op(rng)) {
            case 0: case 1:
                created.push_back(store.make_app(c0, {}));
                break;
            case 2: case 3: case 4:
                created.push_back(store.make_app(c1, {pick()}));
                break;
            case 5: case 6:
                created.push_back(store.make_app(c2, {pick(), pick()}));
                break;
            case 7:
                created.push_back(store.make_list(pick()));
                break;
            case 8: {
                Term t = pick();
                created.push_back(store.is_list(t) ? store.cons(pick(), t)
                                                   : store.make_list(t));
                break;
            }
            default: {
                Term a = pick(), b = pick();
                if (store.is_list(a) && store.is_list(b))
                    created.push_back(store.conc(a, b));
                else
                    created.push_back(store.make_app(c1, {pick()}));
                break;
            }
            }
        }

        // register a random subset as roots
        std::vector<std::unique_ptr<Rooted>> roots;
        std::vector<Term> root_terms;
        std::uniform_int_distribution<int> coin(0, 5);
        for (Term t : created)
            if (coin(rng) == 0) {
                roots.push_back(std::make_unique<Rooted>(store, t));
                root_terms.push_back(t);
            }

        // reachability closure computed before collection
        std::set<uint32_t> reachable;
        std::function<void(Term)> mark = [&](Term t) {
            if (!reachable.insert(t.id).second) return;
            if (store.kind(t) == TermKind::Application) {
                for (uint32_t i = 0; i < store.app_arity(t); i++) mark(store.app_arg(t, i));
            } else if (store.kind(t) == TermKind::ListNode) {
                mark(store.list_head(t));
                mark(store.list_tail(t));
            }
        };
        for (Term t : root_terms) mark(t);

        store.collect();

        for (Term t : created) {
            bool expect = reachable.count(t.id) > 0;
            if (store.live(t) != expect) {
                detail = "log " + std::to_string(log) + ": node " + std::to_string(t.id)
                    + (expect ? " freed though reachable" : " survived though garbage");
                return false;
            }
        }
        for (Term t : store.live_terms()) {
            if (t == store.null()) continue;
            if (!reachable.count(t.id)) {
                detail = "log " + std::to_string(log) + ": unreachable node "
                    + std::to_string(t.id) + " still live";
                return false;
            }
        }
    }
    detail = "interning, immutability, 100 reclamation logs";
    return true;
}

void run_all()
{
    std::string detail;

    detail.clear();
    report("oracle equivalence", oracle_equivalence(detail), detail);

    detail.clear();
    report("preprocessor golden suite", preprocessor_goldens(detail), detail);

    detail.clear();
    report("matching-automaton shape", automaton_shape(detail), detail);

    std::vector<BenchRow> rows = run_sweep();
    detail.clear();
    report("sharing effectiveness", sharing_effectiveness(rows, detail), detail);
    detail.clear();
    report("benchmark correctness", benchmark_residues(rows, detail), detail);

    detail.clear();
    report("term_equal cost", term_equal_cost(detail), detail);

    detail.clear();
    report("tail-recursion elimination", tail_recursion(detail), detail);

    detail.clear();
    report("constant caching", constant_caching(detail), detail);

    detail.clear();
    report("memoization", memoization(detail), detail);

    detail.clear();
    report("store properties", store_properties(detail), detail);
}

} // namespace

int main()
{
    try {
        run_with_big_stack(run_all);
    } catch (const std::exception & e) {
        std::cout << "FAIL  acceptance aborted: " << e.what() << "\n";
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
