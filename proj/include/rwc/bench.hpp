#ifndef RWC_BENCH_HPP
#define RWC_BENCH_HPP

#include <functional>
#include <random>
#include <string>

#include "rwc/oracle.hpp"
#include "rwc/program_io.hpp"
#include "rwc/runtime.hpp"

namespace rwc {

/* Runs fn on a thread with a large stack so that logical recursion hits the
   configured depth limit before the native stack runs out.  Exceptions
   propagate to the caller. */
void run_with_big_stack(const std::function<void()> & fn,
                        size_t stack_bytes = size_t(6) << 30);

struct CompiledModule {
    CollectResult collected;
    Program program;
};

/* Loads a module (and its imports) from a search path, preprocesses,
   compiles, links and optimizes it. */
CompiledModule compile_module(const std::string & name,
                              const std::vector<std::string> & search_path,
                              const PostprocessOptions & post = {},
                              const PlannerOptions & popts = {},
                              std::vector<Diagnostic> * diags = nullptr);

struct BenchConfig {
    std::string benchmark; // evalsym, evalexp or evaltree
    uint32_t n = 17;
    bool sharing = true;
    uint64_t node_budget = 24'000'000; // roughly a 2 GB store
    uint64_t depth_limit = 1'000'000;
    std::vector<std::string> search_path;
};

struct BenchRow {
    std::string benchmark;
    uint32_t n = 0;
    bool sharing = true;
    double wall_ms = 0;
    uint64_t peak_unique_nodes = 0;
    uint64_t peak_total_nodes = 0;
    int residue = -1; // -1 when the cell did not finish
    std::string status = "ok";
};

BenchRow run_bench_cell(const BenchConfig & cfg);

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow & row);

/* 2^(n mod 16) mod 17: the closed form every completed cell must report. */
int expected_residue(uint32_t n);

/* Random ground constructor term over the signature (for the equivalence
   harness). */
Term random_ground_term(TermStore & store, const Signature & sig, std::mt19937 & rng,
                        int max_depth = 5, int max_list = 6);

} // namespace rwc

#endif
