#include "rwc/bench.hpp"

#include <chrono>
#include <pthread.h>

namespace rwc {

namespace {

struct ThreadJob {
    const std::function<void()> * fn;
    std::exception_ptr error;
};

void * thread_main(void * arg)
{
    ThreadJob * job = static_cast<ThreadJob *>(arg);
    try {
        (*job->fn)();
    } catch (...) {
        job->error = std::current_exception();
    }
    return nullptr;
}

} // namespace

void run_with_big_stack(const std::function<void()> & fn, size_t stack_bytes)
{
    ThreadJob job{&fn, nullptr};
    pthread_t tid;
    int rc = -1;
    /* The requested size may exceed what the host can map; fall back to the
       largest stack that can actually be created. */
    for (size_t size = stack_bytes; size >= (size_t(16) << 20); size /= 2) {
        pthread_attr_t attr;
        if (pthread_attr_init(&attr) != 0) throw Error("pthread_attr_init failed");
        if (pthread_attr_setstacksize(&attr, size) != 0) {
            pthread_attr_destroy(&attr);
            continue;
        }
        rc = pthread_create(&tid, &attr, thread_main, &job);
        pthread_attr_destroy(&attr);
        if (rc == 0) break;
    }
    if (rc != 0) throw Error("cannot start worker thread");
    pthread_join(tid, nullptr);
    if (job.error) std::rethrow_exception(job.error);
}

CompiledModule compile_module(const std::string & name,
                              const std::vector<std::string> & search_path,
                              const PostprocessOptions & post, const PlannerOptions & popts,
                              std::vector<Diagnostic> * diags)
{
    ModuleLoader loader(search_path);
    CompiledModule out;
    out.collected = collect_functions(name, loader);
    std::vector<FunctionUnit> units;
    for (const FunctionUnit & u : out.collected.units)
        units.push_back(u.is_constructor_unit ? u
                                              : preprocess_unit(u, out.collected.signature));
    out.program = link_program(units, out.collected.signature, popts, diags);
    postprocess(out.program, post);
    return out;
}

int expected_residue(uint32_t n)
{
    int r = 1;
    for (uint32_t i = 0; i < n % 16; i++) r = (r * 2) % 17;
    return r;
}

BenchRow run_bench_cell(const BenchConfig & cfg)
{
    BenchRow row;
    row.benchmark = cfg.benchmark;
    row.n = cfg.n;
    row.sharing = cfg.sharing;

    CompiledModule cm = compile_module(cfg.benchmark, cfg.search_path);

    TermStore store(cfg.sharing);
    store.set_node_limit(cfg.node_budget);
    RunConfig rc;
    rc.depth_limit = cfg.depth_limit;
    Runtime rt(store, cm.program, rc);

    SymbolId z = store.intern_symbol("z", 0);
    SymbolId s = store.intern_symbol("s", 1);
    Term input = store.make_app(z, {});
    for (uint32_t i = 0; i < cfg.n; i++) input = store.make_app(s, {input});
    SymbolId top = store.intern_symbol(cfg.benchmark, 1);
    input = store.make_app(top, {input});

    Term result{};
    std::exception_ptr resource_error;
    auto start = std::chrono::steady_clock::now();
    run_with_big_stack([&] {
        try {
            result = rt.normalize(input);
        } catch (const ResourceError &) {
            resource_error = std::current_exception();
        }
    });
    auto end = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
    row.peak_unique_nodes = store.stats().peak_unique_nodes;
    row.peak_total_nodes = store.stats().construction_requests;
    if (resource_error) {
        row.status = "dnf";
        return row;
    }
    int r = 0;
    Term t = result;
    while (store.kind(t) == TermKind::Application && store.app_arity(t) == 1
           && store.symbol(store.app_symbol(t)).name == "s") {
        r++;
        t = store.app_arg(t, 0);
    }
    row.residue = r;
    return row;
}

std::string bench_csv_header()
{
    return "benchmark,n,sharing,wall_ms,peak_unique_nodes,peak_total_nodes,residue,status";
}

std::string bench_csv_row(const BenchRow & row)
{
    char wall[32];
    snprintf(wall, sizeof wall, "%.2f", row.wall_ms);
    std::string out = row.benchmark + "," + std::to_string(row.n) + ","
        + (row.sharing ? "on" : "off") + "," + wall + ","
        + std::to_string(row.peak_unique_nodes) + "," + std::to_string(row.peak_total_nodes)
        + "," + (row.residue < 0 ? std::string("") : std::to_string(row.residue)) + ","
        + row.status;
    return out;
}

Term random_ground_term(TermStore & store, const Signature & sig, std::mt19937 & rng,
                        int max_depth, int max_list)
{
    std::vector<const SymbolDecl *> constants;
    std::vector<const SymbolDecl *> ctors;
    for (const auto & [key, d] : sig.all()) {
        if (!d.is_constructor) continue;
        if (d.arity == 0)
            constants.push_back(&d);
        else
            ctors.push_back(&d);
    }
    if (constants.empty()) throw Error("signature has no constant constructors");

    std::function<Term(int)> gen = [&](int depth) -> Term {
        std::uniform_int_distribution<int> kind(0, 9);
        int k = depth <= 0 ? 0 : kind(rng);
        if (k <= 3 || ctors.empty()) {
            std::uniform_int_distribution<size_t> pick(0, constants.size() - 1);
            const SymbolDecl * d = constants[pick(rng)];
            return store.make_app(store.intern_symbol(d->name, 0), {});
        }
        if (k <= 7) {
            std::uniform_int_distribution<size_t> pick(0, ctors.size() - 1);
            const SymbolDecl * d = ctors[pick(rng)];
            std::vector<Term> args;
            for (uint32_t i = 0; i < d->arity; i++) args.push_back(gen(depth - 1));
            return store.make_app(store.intern_symbol(d->name, d->arity), args);
        }
        std::uniform_int_distribution<int> len(0, max_list);
        std::vector<Term> elems;
        int m = len(rng);
        for (int i = 0; i < m; i++) elems.push_back(gen(depth - 1));
        return store.list_from(elems);
    };
    return gen(max_depth);
}

} // namespace rwc
