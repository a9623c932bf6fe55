#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sys/wait.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "rwc/bench.hpp"
#include "rwc/oracle.hpp"
#include "rwc/program_io.hpp"
#include "rwc/term_io.hpp"

namespace fs = std::filesystem;
using namespace rwc;

namespace {

// Exit codes: 1 generic, 2 syntax, 3 compile/link/artifact, 4 resource limit.
constexpr int kExitError = 1;
constexpr int kExitSyntax = 2;
constexpr int kExitLink = 3;
constexpr int kExitResource = 4;

std::vector<std::string> default_search_path(const std::vector<std::string> & file_args)
{
    std::vector<std::string> path;
    for (const std::string & f : file_args) {
        std::string dir = fs::path(f).parent_path().string();
        path.push_back(dir.empty() ? "." : dir);
    }
    if (const char * env = std::getenv("RWC_PATH")) {
        std::string s = env;
        size_t pos = 0;
        while (pos <= s.size()) {
            size_t colon = s.find(':', pos);
            if (colon == std::string::npos) colon = s.size();
            if (colon > pos) path.push_back(s.substr(pos, colon - pos));
            pos = colon + 1;
        }
    }
    path.push_back(".");
#ifdef RWC_CORPUS_DIR
    path.push_back(RWC_CORPUS_DIR);
#endif
    return path;
}

void print_diagnostics(const std::vector<Diagnostic> & diags, const std::string & where)
{
    for (const Diagnostic & d : diags) {
        std::cerr << where << (d.line > 0 ? ":" + std::to_string(d.line) : "") << ": "
                  << (d.level == Diagnostic::Error ? "error: " : "warning: ") << d.message
                  << "\n";
    }
}

std::string sanitize(const std::string & name)
{
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

void write_text(const fs::path & p, const std::string & text)
{
    std::ofstream f(p);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
}

struct OptReport {
    uint64_t tre_sites = 0;
    uint64_t constants = 0;
};

void count_tre(const NodePtr & n, OptReport & r)
{
    if (!n) return;
    if (n->kind == NodeKind::TailCall) r.tre_sites++;
    for (const NodePtr & c : n->children) count_tre(c, r);
    count_tre(n->else_child, r);
    count_tre(n->then, r);
}

OptReport optimization_report(const Program & prog)
{
    OptReport r;
    for (const RewritePlan & p : prog.plans) count_tre(p.root, r);
    r.constants = prog.constants.size();
    return r;
}

int cmd_compile(const std::vector<std::string> & files, std::string main_module,
                const std::string & out_path, bool reorder_args, const std::string & emit_plan,
                const std::string & emit_muasf, bool stats)
{
    ModuleLoader loader(default_search_path(files));
    for (const std::string & f : files) {
        const ModuleDef & m = loader.load_file(f);
        if (main_module.empty()) main_module = m.name;
    }
    if (main_module.empty()) {
        std::cerr << "error: no input files and no --main module\n";
        return kExitError;
    }

    CollectResult collected = collect_functions(main_module, loader);
    PlannerOptions popts;
    popts.reorder_args = reorder_args;

    // Reuse plans of units whose preprocessed form is unchanged.
    std::map<std::string, const CompiledUnit *> previous;
    ProgramArtifact old;
    if (!out_path.empty() && fs::exists(out_path)) {
        try {
            old = load_artifact(out_path);
            if (old.reorder_args == reorder_args)
                for (const CompiledUnit & u : old.units) previous[u.key] = &u;
        } catch (const Error &) {
            // unreadable or incompatible: recompile everything
        }
    }

    ProgramArtifact artifact;
    artifact.reorder_args = reorder_args;
    artifact.signature = collected.signature;
    std::vector<Diagnostic> diags;
    size_t cached = 0, recompiled = 0;
    std::vector<std::pair<std::string, FunctionUnit>> preprocessed; // key -> unit

    for (const FunctionUnit & u : collected.units) {
        if (u.is_constructor_unit) {
            for (const SymbolDecl & d : u.symbols) artifact.constructors.push_back(d);
            continue;
        }
        FunctionUnit pu = preprocess_unit(u, collected.signature);
        CompiledUnit cu;
        cu.key = u.name + "/" + std::to_string(u.arity);
        cu.fingerprint = unit_fingerprint(pu, popts);
        auto it = previous.find(cu.key);
        if (it != previous.end() && it->second->fingerprint == cu.fingerprint) {
            cu.plan = it->second->plan;
            cached++;
            std::cerr << "cached " << cu.key << "\n";
        } else {
            cu.plan = compile_unit(pu, collected.signature, popts, &diags);
            recompiled++;
            std::cerr << "compiled " << cu.key << "\n";
        }
        artifact.units.push_back(std::move(cu));
        preprocessed.emplace_back(artifact.units.back().key, std::move(pu));
    }
    print_diagnostics(diags, main_module);
    for (const Diagnostic & d : diags)
        if (d.level == Diagnostic::Error) return kExitLink;

    // A full assembly validates the cross-references before anything is saved.
    diags.clear();
    Program prog = assemble_program(artifact, {}, &diags);
    print_diagnostics(diags, main_module);

    if (!out_path.empty()) save_artifact(artifact, out_path);
    std::cerr << cached << " cached, " << recompiled << " recompiled\n";

    if (!emit_muasf.empty()) {
        fs::create_directories(emit_muasf);
        for (const auto & [key, pu] : preprocessed)
            write_text(fs::path(emit_muasf) / (sanitize(key) + ".muasf"), print_unit(pu));
    }
    if (!emit_plan.empty()) {
        fs::create_directories(emit_plan);
        for (const RewritePlan & p : prog.plans) {
            std::string key = p.name + "/" + std::to_string(p.arity);
            write_text(fs::path(emit_plan) / (sanitize(key) + ".plan"), print_plan(p) + "\n");
        }
    }
    if (stats) {
        OptReport r = optimization_report(prog);
        std::cout << "units=" << artifact.units.size() << "\n"
                  << "cached=" << cached << "\n"
                  << "recompiled=" << recompiled << "\n"
                  << "tre_sites=" << r.tre_sites << "\n"
                  << "cached_constants=" << r.constants << "\n";
    }
    return 0;
}

int cmd_run(const std::string & artifact_path, const std::string & term_text, bool no_sharing,
            const std::string & memo_list, bool no_tre, bool no_constcache,
            uint64_t depth_limit, bool stats)
{
    ProgramArtifact artifact = load_artifact(artifact_path);
    PostprocessOptions post;
    post.tail_recursion = !no_tre;
    post.const_cache = !no_constcache;
    Program prog = assemble_program(artifact, post);

    if (!memo_list.empty()) {
        size_t pos = 0;
        while (pos <= memo_list.size()) {
            size_t comma = memo_list.find(',', pos);
            if (comma == std::string::npos) comma = memo_list.size();
            std::string name = memo_list.substr(pos, comma - pos);
            pos = comma + 1;
            if (name.empty()) continue;
            bool found = false;
            for (RewritePlan & p : prog.plans)
                if (p.name == name) p.memo = true, found = true;
            if (!found) throw Error("--memo: no function named " + name);
        }
    }

    TermStore store(!no_sharing);
    RunConfig rc;
    rc.depth_limit = depth_limit;
    Runtime rt(store, prog, rc);

    std::string text =
        term_text.size() > 1 && term_text[0] == '@' ? read_file(term_text.substr(1)) : term_text;
    // Parsing and printing recurse over the input, so deep terms need the big
    // stack as much as the normalization itself.
    bool bad_term = false;
    std::chrono::steady_clock::duration elapsed{};
    run_with_big_stack([&] {
        Term input{};
        try {
            input = parse_term(store, text);
        } catch (const Error & e) {
            std::cerr << "syntax error: " << e.what() << "\n";
            bad_term = true;
            return;
        }
        auto start = std::chrono::steady_clock::now();
        Term result = rt.normalize(input);
        elapsed = std::chrono::steady_clock::now() - start;
        std::cout << print_term(store, result) << "\n";
    });
    if (bad_term) return kExitSyntax;

    if (stats) {
        double wall = std::chrono::duration<double, std::milli>(elapsed).count();
        const ExecutionStats & es = rt.stats();
        const StoreStats & ss = store.stats();
        OptReport r = optimization_report(prog);
        nlohmann::ordered_json j{
            {"rule_applications", es.rule_applications},
            {"plan_calls", es.plan_calls},
            {"memo_hits", es.memo_hits},
            {"const_cache_hits", es.const_cache_hits},
            {"const_cache_misses", es.const_cache_misses},
            {"max_frame_depth", es.max_frame_depth},
            {"unique_nodes", ss.unique_nodes},
            {"peak_unique_nodes", ss.peak_unique_nodes},
            {"construction_requests", ss.construction_requests},
            {"interning_hits", ss.interning_hits},
            {"tre_sites", r.tre_sites},
            {"cached_constants", r.constants},
            {"wall_ms", wall},
        };
        for (const auto & [k, v] : j.items()) std::cerr << k << "=" << v.dump() << "\n";
        std::cerr << j.dump() << "\n";
    }
    return 0;
}

int cmd_bench(const std::string & name, uint32_t n_min, uint32_t n_max,
              const std::string & sharing, uint64_t node_budget, uint64_t depth_limit,
              int jobs, int reps, const std::string & out_path)
{
    std::vector<std::string> names;
    if (name == "all")
        names = {"evalsym", "evalexp", "evaltree"};
    else
        names = {name};

    std::vector<bool> modes;
    if (sharing == "both")
        modes = {true, false};
    else if (sharing == "on")
        modes = {true};
    else
        modes = {false};

    std::vector<BenchConfig> cells;
    for (const std::string & b : names)
        for (uint32_t n = n_min; n <= n_max; n++)
            for (bool m : modes) {
                BenchConfig cfg;
                cfg.benchmark = b;
                cfg.n = n;
                cfg.sharing = m;
                cfg.node_budget = node_budget;
                cfg.depth_limit = depth_limit;
                cfg.search_path = default_search_path({});
                cells.push_back(cfg);
            }

    auto run_cell = [&](const BenchConfig & cfg) {
        BenchRow best = run_bench_cell(cfg);
        for (int i = 1; i < reps; i++) {
            BenchRow r = run_bench_cell(cfg);
            if (r.wall_ms < best.wall_ms) best = r;
        }
        return best;
    };

    std::vector<std::string> rows(cells.size());
    if (jobs <= 1) {
        for (size_t i = 0; i < cells.size(); i++) rows[i] = bench_csv_row(run_cell(cells[i]));
    } else {
        // One process per cell so stores are never shared; at most `jobs` at once.
        std::map<pid_t, std::pair<size_t, int>> running; // pid -> (cell, read fd)
        auto reap = [&] {
            int status = 0;
            pid_t pid = waitpid(-1, &status, 0);
            if (pid <= 0) return;
            auto it = running.find(pid);
            if (it == running.end()) return;
            auto [idx, fd] = it->second;
            std::string line;
            char buf[512];
            ssize_t k;
            while ((k = read(fd, buf, sizeof buf)) > 0) line.append(buf, k);
            close(fd);
            while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
                line.pop_back();
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0 || line.empty()) {
                const BenchConfig & c = cells[idx];
                line = c.benchmark + "," + std::to_string(c.n) + ","
                    + (c.sharing ? "on" : "off") + ",0.00,0,0,,error";
            }
            rows[idx] = line;
            running.erase(it);
        };
        for (size_t i = 0; i < cells.size(); i++) {
            while (static_cast<int>(running.size()) >= jobs) reap();
            int pipefd[2];
            if (pipe(pipefd) != 0) throw Error("pipe failed");
            pid_t pid = fork();
            if (pid < 0) throw Error("fork failed");
            if (pid == 0) {
                close(pipefd[0]);
                std::string line = bench_csv_row(run_cell(cells[i])) + "\n";
                ssize_t ignored = write(pipefd[1], line.data(), line.size());
                (void)ignored;
                close(pipefd[1]);
                _exit(0);
            }
            close(pipefd[1]);
            running[pid] = {i, pipefd[0]};
        }
        while (!running.empty()) reap();
    }

    std::ostringstream csv;
    csv << bench_csv_header() << "\n";
    for (const std::string & r : rows) csv << r << "\n";
    if (out_path.empty())
        std::cout << csv.str();
    else
        write_text(out_path, csv.str());

    // Every completed cell must report the closed-form residue.
    bool ok = true;
    for (size_t i = 0; i < cells.size(); i++) {
        if (rows[i].size() < 2 || rows[i].substr(rows[i].size() - 2) != "ok") continue;
        size_t last = rows[i].rfind(',');
        size_t prev = rows[i].rfind(',', last - 1);
        int residue = std::stoi(rows[i].substr(prev + 1, last - prev - 1));
        if (residue != expected_residue(cells[i].n)) {
            std::cerr << "error: wrong residue in row: " << rows[i] << " (expected "
                      << expected_residue(cells[i].n) << ")\n";
            ok = false;
        }
    }
    return ok ? 0 : kExitError;
}

int cmd_oracle(const std::vector<std::string> & files, std::string main_module,
               const std::string & term_text)
{
    ModuleLoader loader(default_search_path(files));
    for (const std::string & f : files) {
        const ModuleDef & m = loader.load_file(f);
        if (main_module.empty()) main_module = m.name;
    }
    CollectResult collected = collect_functions(main_module, loader);
    TermStore store;
    Oracle oracle(store, collected);
    std::string text =
        term_text.size() > 1 && term_text[0] == '@' ? read_file(term_text.substr(1)) : term_text;
    run_with_big_stack([&] {
        Term t = parse_term(store, text);
        std::cout << print_term(store, oracle.normalize(t)) << "\n";
    });
    return 0;
}

} // namespace

int main(int argc, char ** argv)
{
    CLI::App app{"rwc: compiler and runtime for a conditional term-rewriting language"};
    app.require_subcommand(1);

    // compile
    auto * compile = app.add_subcommand("compile", "compile modules to a program artifact");
    std::vector<std::string> files;
    std::string main_module, out_path, emit_plan, emit_muasf;
    bool reorder_args = false, compile_stats = false;
    compile->add_option("files", files, "module source files (.masf)");
    compile->add_option("--main", main_module, "top module (default: first file's module)");
    compile->add_option("--out,-o", out_path, "artifact output path");
    compile->add_flag("--reorder-args", reorder_args,
                      "order argument matching by discriminating power");
    compile->add_option("--emit-plan", emit_plan, "dump one plan file per function to DIR");
    compile->add_option("--emit-muasf-plus", emit_muasf,
                        "dump preprocessed unit text per function to DIR");
    compile->add_flag("--stats", compile_stats, "print compilation statistics");

    // run
    auto * run = app.add_subcommand("run", "normalize a term against a compiled artifact");
    std::string artifact_path, term_text, memo_list;
    bool no_sharing = false, no_tre = false, no_constcache = false, run_stats = false;
    uint64_t depth_limit = 1'000'000;
    run->add_option("artifact", artifact_path, "compiled artifact")->required();
    run->add_option("term", term_text, "input term text, or @FILE")->required();
    run->add_flag("--no-sharing", no_sharing, "disable maximal subterm sharing");
    run->add_option("--memo", memo_list, "comma-separated functions to memoize");
    run->add_flag("--no-tre", no_tre, "disable tail-recursion elimination");
    run->add_flag("--no-constcache", no_constcache, "disable constant caching");
    run->add_option("--depth-limit", depth_limit, "logical call depth limit");
    run->add_flag("--stats", run_stats, "print execution statistics to stderr");

    // bench
    auto * bench = app.add_subcommand("bench", "run the benchmark suite, CSV output");
    std::string bench_name = "all", sharing_mode = "both", bench_out;
    uint32_t n_min = 17, n_max = 23;
    uint64_t node_budget = 24'000'000, bench_depth = 1'000'000;
    int jobs = 1, reps = 1;
    bool bench_no_sharing = false;
    bench->add_option("benchmark", bench_name, "evalsym, evalexp, evaltree or all")
        ->check(CLI::IsMember({"evalsym", "evalexp", "evaltree", "all"}));
    bench->add_option("--n-min", n_min, "smallest n");
    bench->add_option("--n-max", n_max, "largest n");
    bench->add_option("--sharing", sharing_mode, "both, on or off")
        ->check(CLI::IsMember({"both", "on", "off"}));
    bench->add_flag("--no-sharing", bench_no_sharing, "shorthand for --sharing off");
    bench->add_option("--node-budget", node_budget, "store node limit per cell");
    bench->add_option("--depth-limit", bench_depth, "logical call depth limit");
    bench->add_option("--jobs", jobs, "run up to K cells in separate processes");
    bench->add_option("--reps", reps, "repetitions per cell (fastest kept)");
    bench->add_option("--out", bench_out, "CSV output file (default stdout)");

    // oracle-normalize (hidden: debugging aid backed by the reference interpreter)
    auto * oracle = app.add_subcommand("oracle-normalize", "");
    std::vector<std::string> oracle_files;
    std::string oracle_main, oracle_term;
    oracle->add_option("term", oracle_term, "input term text")->required();
    oracle->add_option("files", oracle_files, "module source files");
    oracle->add_option("--main", oracle_main, "top module");
    oracle->group("");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*compile)
            return cmd_compile(files, main_module, out_path, reorder_args, emit_plan,
                               emit_muasf, compile_stats);
        if (*run)
            return cmd_run(artifact_path, term_text, no_sharing, memo_list, no_tre,
                           no_constcache, depth_limit, run_stats);
        if (*bench)
            return cmd_bench(bench_name, n_min, n_max,
                             bench_no_sharing ? "off" : sharing_mode, node_budget,
                             bench_depth, jobs, reps, bench_out);
        if (*oracle) return cmd_oracle(oracle_files, oracle_main, oracle_term);
    } catch (const SyntaxError & e) {
        std::cerr << "syntax error: " << e.what() << "\n";
        return kExitSyntax;
    } catch (const ResourceError & e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kExitResource;
    } catch (const Error & e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitLink;
    } catch (const std::exception & e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return 0;
}
