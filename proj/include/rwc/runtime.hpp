#ifndef RWC_RUNTIME_HPP
#define RWC_RUNTIME_HPP

#include <unordered_map>

#include "rwc/plan.hpp"
#include "rwc/term.hpp"

namespace rwc {

struct RunConfig {
    bool memo_enabled = true;        // also requires sharing and per-symbol memo
    bool const_cache_enabled = true;
    uint64_t depth_limit = 1'000'000; // logical call frames
};

struct ExecutionStats {
    uint64_t rule_applications = 0;
    uint64_t plan_calls = 0;
    uint64_t memo_hits = 0;
    uint64_t const_cache_hits = 0;
    uint64_t const_cache_misses = 0;
    uint64_t max_frame_depth = 0;
};

/* Innermost normalization by plan execution.  The traversal of the input
   term uses an explicit stack, so input depth is bounded by memory, not by
   the native stack; native recursion tracks only nested function calls. */
class Runtime {
public:
    Runtime(TermStore & store, const Program & program, RunConfig cfg = {});
    ~Runtime();
    Runtime(const Runtime &) = delete;
    Runtime & operator=(const Runtime &) = delete;

    Term normalize(Term t);

    const ExecutionStats & stats() const { return stats_; }
    void reset_stats() { stats_ = {}; }
    void clear_caches();

private:
    struct Value {
        Term term{};      // term, or slice begin cursor
        Term end{};       // valid: slice ends (exclusive) at this cursor
        bool maybe_raw = false; // may contain unevaluated (delayed) calls
    };

    struct Ctx {
        const RewritePlan * plan;
        std::vector<Value> frame;
        std::vector<Value> tail_args;
    };

    enum class RK : uint8_t { Fail, Done, Tail };
    struct ExecResult {
        RK kind;
        Term term{};
    };

    Term apply(size_t plan_idx, std::vector<Value> args);
    ExecResult exec(const PlanNode * n, Ctx & ctx);
    Term eval_term(const EvalExpr & e, Ctx & ctx, bool quoted);
    Value eval_arg(const EvalPtr & e, Ctx & ctx);
    Term eval_ground(const ExprPtr & e);
    Term eval_const(uint32_t index);
    Term materialize(const Value & v);
    Term use_value(Value & v); // materialized and normalized
    bool value_empty(const Value & v) const;

    void prepare(const NodePtr & n);
    void prepare_expr(const EvalPtr & e);

    TermStore & store_;
    const Program & prog_;
    RunConfig cfg_;
    ExecutionStats stats_;
    uint64_t depth_ = 0;

    std::unordered_map<const PlanNode *, SymbolId> node_syms_;
    std::unordered_map<const EvalExpr *, SymbolId> expr_syms_;
    std::vector<SymbolId> plan_syms_;          // per plan index
    std::vector<int32_t> plan_by_symbol_;      // SymbolId index -> plan index or -1

    struct MemoKey {
        std::vector<uint32_t> ids;
        bool operator==(const MemoKey & o) const { return ids == o.ids; }
    };
    struct MemoHash {
        size_t operator()(const MemoKey & k) const
        {
            size_t h = 1469598103u;
            for (uint32_t id : k.ids) h = (h ^ id) * 1099511628211ull;
            return h;
        }
    };
    std::vector<std::unordered_map<MemoKey, Term, MemoHash>> memo_;
    std::vector<Term> const_cache_;            // invalid = not yet evaluated
    std::unordered_map<uint32_t, Term> norm_cache_;
    uint64_t root_provider_ = 0;
};

} // namespace rwc

#endif
