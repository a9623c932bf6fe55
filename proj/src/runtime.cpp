#include "rwc/runtime.hpp"

#include <utility>

namespace rwc {

Runtime::Runtime(TermStore & store, const Program & program, RunConfig cfg)
    : store_(store), prog_(program), cfg_(cfg)
{
    for (const SymbolDecl & c : prog_.constructors) {
        SymbolInfo info;
        info.name = c.name;
        info.arity = c.arity;
        info.is_constructor = true;
        info.memo = c.memo;
        info.delay_positions = c.delay_positions;
        store_.intern_symbol(info);
    }
    plan_syms_.reserve(prog_.plans.size());
    for (size_t i = 0; i < prog_.plans.size(); i++) {
        const RewritePlan & p = prog_.plans[i];
        SymbolId s = store_.intern_symbol(p.name, p.arity);
        plan_syms_.push_back(s);
        if (s.index >= plan_by_symbol_.size()) plan_by_symbol_.resize(s.index + 1, -1);
        plan_by_symbol_[s.index] = static_cast<int32_t>(i);
        prepare(p.root);
    }
    memo_.resize(prog_.plans.size());
    const_cache_.resize(prog_.constants.size());
    root_provider_ = store_.add_root_provider([this](std::vector<Term> & out) {
        for (Term t : const_cache_)
            if (t.valid()) out.push_back(t);
        for (const auto & tab : memo_)
            for (const auto & kv : tab) {
                for (uint32_t id : kv.first.ids) out.push_back(Term{id});
                out.push_back(kv.second);
            }
        for (const auto & kv : norm_cache_) {
            out.push_back(Term{kv.first});
            out.push_back(kv.second);
        }
    });
}

Runtime::~Runtime() { store_.remove_root_provider(root_provider_); }

void Runtime::clear_caches()
{
    for (auto & tab : memo_) tab.clear();
    const_cache_.assign(prog_.constants.size(), Term{});
    norm_cache_.clear();
}

void Runtime::prepare(const NodePtr & n)
{
    if (!n) return;
    if (n->kind == NodeKind::CheckSym)
        node_syms_[n.get()] = store_.intern_symbol(n->sym, n->arity);
    prepare_expr(n->expr);
    for (const EvalPtr & a : n->call_args) prepare_expr(a);
    for (const NodePtr & c : n->children) prepare(c);
    prepare(n->else_child);
    prepare(n->then);
}

void Runtime::prepare_expr(const EvalPtr & e)
{
    if (!e) return;
    if (e->kind == EvalExpr::K::Make && e->target != -2)
        expr_syms_[e.get()] = store_.intern_symbol(e->sym, e->arity);
    for (const EvalPtr & a : e->args) prepare_expr(a);
    for (const EvalExpr::Item & it : e->items) prepare_expr(it.e);
}

Term Runtime::materialize(const Value & v)
{
    if (!v.end.valid() || v.end == store_.null()) return v.term;
    return store_.slice(v.term, v.end);
}

Term Runtime::use_value(Value & v)
{
    Term t = materialize(v);
    v.term = t;
    v.end = Term{};
    if (v.maybe_raw) {
        t = normalize(t);
        v.term = t;
        v.maybe_raw = false;
    }
    return t;
}

bool Runtime::value_empty(const Value & v) const
{
    Term endp = v.end.valid() ? v.end : store_.null();
    return v.term == endp;
}

Term Runtime::normalize(Term t0)
{
    const bool cache_on = store_.sharing();
    if (cache_on) {
        auto it = norm_cache_.find(t0.id);
        if (it != norm_cache_.end()) return it->second;
    }
    struct F {
        Term t;
        uint32_t next = 0;
        std::vector<Term> kids;
    };
    std::vector<F> st;
    st.push_back({t0});
    Term result{};
    auto deliver = [&](Term r, bool cache) {
        if (cache && cache_on) norm_cache_.emplace(st.back().t.id, r);
        st.pop_back();
        if (st.empty())
            result = r;
        else
            st.back().kids.push_back(r);
    };
    while (!st.empty()) {
        F & f = st.back();
        if (cache_on && f.next == 0 && f.kids.empty()) {
            auto it = norm_cache_.find(f.t.id);
            if (it != norm_cache_.end()) {
                deliver(it->second, false);
                continue;
            }
        }
        switch (store_.kind(f.t)) {
        case TermKind::EmptyList:
            deliver(f.t, true);
            break;
        case TermKind::ListNode:
            if (f.next == 0) {
                Term head = store_.list_head(f.t);
                f.next = 1;
                st.push_back({head});
            } else if (f.next == 1) {
                Term tail = store_.list_tail(f.t);
                f.next = 2;
                st.push_back({tail});
            } else {
                deliver(store_.cons(f.kids[0], f.kids[1]), true);
            }
            break;
        case TermKind::Application: {
            uint32_t n = store_.app_arity(f.t);
            if (f.next < n) {
                Term arg = store_.app_arg(f.t, f.next);
                f.next++;
                st.push_back({arg});
            } else {
                SymbolId s = store_.app_symbol(f.t);
                int32_t pi = s.index < plan_by_symbol_.size() ? plan_by_symbol_[s.index] : -1;
                Term r;
                if (pi >= 0) {
                    std::vector<Value> vals;
                    vals.reserve(f.kids.size());
                    for (Term k : f.kids) vals.push_back(Value{k});
                    r = apply(static_cast<size_t>(pi), std::move(vals));
                } else {
                    r = store_.make_app(s, f.kids);
                }
                deliver(r, true);
            }
            break;
        }
        }
    }
    return result;
}

Term Runtime::apply(size_t plan_idx, std::vector<Value> args)
{
    const RewritePlan & p = prog_.plans[plan_idx];
    stats_.plan_calls++;
    if (++depth_ > cfg_.depth_limit) {
        depth_--;
        throw ResourceError("call depth limit exceeded (" + std::to_string(cfg_.depth_limit)
                            + ") in " + p.name + "/" + std::to_string(p.arity));
    }
    struct DepthGuard {
        uint64_t & d;
        ~DepthGuard() { d--; }
    } dg{depth_};
    if (depth_ > stats_.max_frame_depth) stats_.max_frame_depth = depth_;

    const bool memo_on = p.memo && cfg_.memo_enabled && store_.sharing();
    MemoKey key;
    if (memo_on) {
        for (Value & a : args) {
            Term t = materialize(a);
            a.term = t;
            a.end = Term{};
            key.ids.push_back(t.id);
        }
        auto it = memo_[plan_idx].find(key);
        if (it != memo_[plan_idx].end()) {
            stats_.memo_hits++;
            return it->second;
        }
    }

    Ctx ctx;
    ctx.plan = &p;
    ctx.frame.resize(p.frame_size);
    for (size_t i = 0; i < args.size(); i++) ctx.frame[i] = args[i];
    Term out{};
    for (;;) {
        ExecResult r = exec(p.root.get(), ctx);
        if (r.kind == RK::Tail) {
            std::vector<Value> next = std::move(ctx.tail_args);
            ctx.tail_args.clear();
            ctx.frame.assign(p.frame_size, Value{});
            for (size_t i = 0; i < next.size(); i++) ctx.frame[i] = next[i];
            continue;
        }
        if (r.kind == RK::Fail)
            throw Error("internal error: plan for " + p.name + " failed without fallthrough");
        out = r.term;
        break;
    }
    if (memo_on) memo_[plan_idx].emplace(std::move(key), out);
    return out;
}

Runtime::ExecResult Runtime::exec(const PlanNode * n, Ctx & ctx)
{
    std::vector<Value> & f = ctx.frame;
    while (n) {
        switch (n->kind) {
        case NodeKind::Alt: {
            for (const NodePtr & c : n->children) {
                ExecResult r = exec(c.get(), ctx);
                if (r.kind != RK::Fail) return r;
            }
            if (n->else_child) return exec(n->else_child.get(), ctx);
            return {RK::Fail};
        }
        case NodeKind::CheckSym: {
            /* Structural inspection: a raw (delayed) value is matched as
               built, without normalizing it first. */
            const Value & v = f[n->slot_a];
            if (v.end.valid()) return {RK::Fail};
            if (store_.kind(v.term) != TermKind::Application) return {RK::Fail};
            if (store_.app_symbol(v.term) != node_syms_.at(n)) return {RK::Fail};
            break;
        }
        case NodeKind::CheckEqual: {
            Term a = use_value(f[n->slot_a]);
            Term b = use_value(f[n->slot_b]);
            if (store_.term_equal(a, b) == n->negate) return {RK::Fail};
            break;
        }
        case NodeKind::Guard: {
            Value & v = f[n->slot_a];
            if (v.maybe_raw) use_value(v);
            if (!v.end.valid() && !store_.is_list(v.term)) return {RK::Fail};
            bool empty = value_empty(v);
            bool ok = false;
            switch (n->guard) {
            case GuardKind::NonEmpty: ok = !empty; break;
            case GuardKind::Empty: ok = empty; break;
            case GuardKind::Single: {
                Term endp = v.end.valid() ? v.end : store_.null();
                ok = !empty && store_.list_tail(v.term) == endp;
                break;
            }
            }
            if (!ok) return {RK::Fail};
            break;
        }
        case NodeKind::BindArg: {
            const Value & v = f[n->slot_a];
            f[n->slot_b] = Value{store_.app_arg(v.term, n->index), Term{}, v.maybe_raw};
            break;
        }
        case NodeKind::Head: {
            Value & v = f[n->slot_a];
            if (v.maybe_raw) use_value(v);
            if (value_empty(v)) return {RK::Fail};
            f[n->slot_b] = Value{store_.list_head(v.term)};
            break;
        }
        case NodeKind::Tail: {
            Value & v = f[n->slot_a];
            if (v.maybe_raw) use_value(v);
            if (value_empty(v)) return {RK::Fail};
            f[n->slot_b] = Value{store_.list_tail(v.term), v.end};
            break;
        }
        case NodeKind::Last: {
            Value & v = f[n->slot_a];
            if (v.maybe_raw) use_value(v);
            if (value_empty(v)) return {RK::Fail};
            Term endp = v.end.valid() ? v.end : store_.null();
            Term p = v.term;
            while (store_.list_tail(p) != endp) p = store_.list_tail(p);
            f[n->slot_b] = Value{store_.list_head(p)};
            break;
        }
        case NodeKind::Prefix: {
            Value & v = f[n->slot_a];
            if (v.maybe_raw) use_value(v);
            if (value_empty(v)) return {RK::Fail};
            Term endp = v.end.valid() ? v.end : store_.null();
            Term p = v.term;
            while (store_.list_tail(p) != endp) p = store_.list_tail(p);
            f[n->slot_b] = Value{v.term, p};
            break;
        }
        case NodeKind::ListSplit: {
            Value & v = f[n->slot_a];
            if (v.maybe_raw) use_value(v);
            if (!v.end.valid() && !store_.is_list(v.term)) return {RK::Fail};
            Term endp = v.end.valid() ? v.end : store_.null();
            Term begin = v.term;
            const PlanNode * body = n->children.empty() ? nullptr : n->children[0].get();
            uint32_t len = 0;
            for (Term q = begin;; q = store_.list_tail(q), len++) {
                if (len >= n->min_len) {
                    f[n->slot_b] = Value{begin, q};
                    f[n->slot_c] = Value{q, endp};
                    ExecResult r = exec(body, ctx);
                    if (r.kind != RK::Fail) return r;
                }
                if (q == endp) break;
            }
            return {RK::Fail};
        }
        case NodeKind::Eval:
            f[n->slot_a] = eval_arg(n->expr, ctx);
            break;
        case NodeKind::Return:
            stats_.rule_applications++;
            return {RK::Done, eval_term(*n->expr, ctx, false)};
        case NodeKind::Fallthrough: {
            std::vector<Term> args;
            args.reserve(ctx.plan->arity);
            for (uint32_t i = 0; i < ctx.plan->arity; i++) args.push_back(use_value(f[i]));
            size_t idx = static_cast<size_t>(ctx.plan - prog_.plans.data());
            return {RK::Done, store_.make_app(plan_syms_[idx], args)};
        }
        case NodeKind::TailCall: {
            stats_.rule_applications++;
            ctx.tail_args.clear();
            for (const EvalPtr & a : n->call_args) ctx.tail_args.push_back(eval_arg(a, ctx));
            return {RK::Tail};
        }
        }
        n = n->then.get();
    }
    return {RK::Fail};
}

Runtime::Value Runtime::eval_arg(const EvalPtr & e, Ctx & ctx)
{
    if (e->kind == EvalExpr::K::Make && e->quoted)
        return Value{eval_term(*e, ctx, true), Term{}, true};
    return Value{eval_term(*e, ctx, false)};
}

Term Runtime::eval_term(const EvalExpr & e, Ctx & ctx, bool quoted)
{
    switch (e.kind) {
    case EvalExpr::K::Slot: {
        Value & v = ctx.frame[e.slot];
        if (quoted) {
            Term t = materialize(v);
            v.term = t;
            v.end = Term{};
            return t;
        }
        return use_value(v);
    }
    case EvalExpr::K::Const:
        return eval_const(e.const_index);
    case EvalExpr::K::Make: {
        if (e.quoted || quoted) {
            std::vector<Term> args;
            args.reserve(e.args.size());
            for (const EvalPtr & a : e.args) args.push_back(eval_term(*a, ctx, true));
            return store_.make_app(expr_syms_.at(&e), args);
        }
        if (e.target == -2) {
            Term a = eval_term(*e.args.at(0), ctx, false);
            if (e.sym == "not_empty_list")
                return store_.make_constant(store_.not_empty_list(a) ? "t" : "f");
            if (e.sym == "is_single_element")
                return store_.make_constant(store_.is_single_element(a) ? "t" : "f");
            if (e.sym == "list_head") return store_.list_head(a);
            if (e.sym == "list_tail") return store_.list_tail(a);
            if (e.sym == "list_last") return store_.list_last(a);
            if (e.sym == "list_prefix") return store_.list_prefix(a);
            throw Error("unknown builtin " + e.sym);
        }
        if (e.target >= 0) {
            std::vector<Value> vals;
            vals.reserve(e.args.size());
            for (const EvalPtr & a : e.args) vals.push_back(eval_arg(a, ctx));
            return apply(static_cast<size_t>(e.target), std::move(vals));
        }
        std::vector<Term> args;
        args.reserve(e.args.size());
        for (const EvalPtr & a : e.args) args.push_back(eval_term(*a, ctx, false));
        return store_.make_app(expr_syms_.at(&e), args);
    }
    case EvalExpr::K::MakeList: {
        Term acc = store_.null();
        for (size_t i = e.items.size(); i-- > 0;) {
            const EvalExpr::Item & it = e.items[i];
            Term v = eval_term(*it.e, ctx, quoted);
            if (it.splice)
                acc = acc == store_.null() ? v : store_.conc(v, acc);
            else
                acc = store_.cons(v, acc);
        }
        return acc;
    }
    }
    throw Error("bad eval expression");
}

Term Runtime::eval_const(uint32_t index)
{
    if (cfg_.const_cache_enabled && const_cache_[index].valid()) {
        stats_.const_cache_hits++;
        return const_cache_[index];
    }
    stats_.const_cache_misses++;
    Term t = eval_ground(prog_.constants.at(index));
    if (cfg_.const_cache_enabled) const_cache_[index] = t;
    return t;
}

Term Runtime::eval_ground(const ExprPtr & e)
{
    switch (e->kind) {
    case ExprKind::Var:
    case ExprKind::ListVar:
        throw Error("constant expression contains a variable: " + e->name);
    case ExprKind::Null:
        return store_.null();
    case ExprKind::List:
        return store_.make_list(eval_ground(e->args.at(0)));
    case ExprKind::Conc: {
        auto as_list = [&](const ExprPtr & x) {
            Term t = eval_ground(x);
            return is_list_expr(*x) ? t : store_.make_list(t);
        };
        Term l1 = as_list(e->args.at(0));
        Term l2 = as_list(e->args.at(1));
        return store_.conc(l1, l2);
    }
    case ExprKind::App: {
        std::vector<Term> args;
        args.reserve(e->args.size());
        for (const ExprPtr & a : e->args) args.push_back(eval_ground(a));
        auto it = prog_.plan_index.find(e->name + "/" + std::to_string(e->args.size()));
        if (it != prog_.plan_index.end()) {
            std::vector<Value> vals;
            vals.reserve(args.size());
            for (Term t : args) vals.push_back(Value{t});
            return apply(it->second, std::move(vals));
        }
        return store_.make_app(
            store_.intern_symbol(e->name, static_cast<uint32_t>(e->args.size())), args);
    }
    }
    throw Error("bad constant expression");
}

} // namespace rwc
