#include "rwc/planner.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace rwc {

// --- rule ordering ---

namespace {

void flatten_items(const ExprPtr & e, std::vector<ExprPtr> & items)
{
    switch (e->kind) {
    case ExprKind::Null:
        return;
    case ExprKind::List:
        items.push_back(e->args[0]);
        return;
    case ExprKind::Conc:
        flatten_items(e->args[0], items);
        flatten_items(e->args[1], items);
        return;
    default:
        items.push_back(e);
        return;
    }
}

/* Pattern subsumption: can `g`, with its variables as wildcards, match the
   pattern `s` read as a ground term (variables of `s` as opaque names)? */
struct SubsumeCtx {
    std::map<std::string, std::string> map;

    bool expr(const ExprPtr & g, const ExprPtr & s)
    {
        if (g->kind == ExprKind::Var) {
            if (s->kind == ExprKind::ListVar) return false;
            return bind(g->name, print_expr(*s));
        }
        if (is_list_expr(*g)) {
            if (!is_list_expr(*s)) return false;
            std::vector<ExprPtr> gi, si;
            flatten_items(g, gi);
            flatten_items(s, si);
            return items(gi, 0, si, 0);
        }
        if (g->kind != ExprKind::App || s->kind != ExprKind::App) return false;
        if (g->name != s->name || g->args.size() != s->args.size()) return false;
        for (size_t i = 0; i < g->args.size(); i++)
            if (!expr(g->args[i], s->args[i])) return false;
        return true;
    }

    bool items(const std::vector<ExprPtr> & g, size_t i, const std::vector<ExprPtr> & s,
               size_t lo)
    {
        if (i == g.size()) return lo == s.size();
        if (g[i]->kind == ExprKind::ListVar) {
            size_t min_len = g[i]->name[0] == '+' ? 1 : 0;
            for (size_t len = min_len; lo + len <= s.size(); len++) {
                SubsumeCtx saved = *this;
                std::string key;
                for (size_t j = 0; j < len; j++) key += print_expr(*s[lo + j]) + ";";
                if (bind(g[i]->name, key) && items(g, i + 1, s, lo + len)) return true;
                *this = saved;
            }
            return false;
        }
        if (lo >= s.size() || s[lo]->kind == ExprKind::ListVar) return false;
        SubsumeCtx saved = *this;
        if (expr(g[i], s[lo]) && items(g, i + 1, s, lo + 1)) return true;
        *this = saved;
        return false;
    }

    bool bind(const std::string & name, const std::string & key)
    {
        auto it = map.find(name);
        if (it != map.end()) return it->second == key;
        map[name] = key;
        return true;
    }
};

bool subsumes(const ExprPtr & general, const ExprPtr & specific)
{
    SubsumeCtx ctx;
    return ctx.expr(general, specific);
}

} // namespace

std::vector<Rule> order_rules(std::vector<Rule> rules, std::vector<Diagnostic> * diags)
{
    std::stable_partition(rules.begin(), rules.end(),
                          [](const Rule & r) { return !r.is_default; });
    bool changed = true;
    size_t guard = rules.size() + 1;
    while (changed && guard--) {
        changed = false;
        for (size_t i = 0; i + 1 < rules.size(); i++) {
            if (rules[i].is_default || rules[i + 1].is_default) continue;
            bool right_more_specific = subsumes(rules[i].lhs, rules[i + 1].lhs)
                && !subsumes(rules[i + 1].lhs, rules[i].lhs);
            if (right_more_specific) {
                std::swap(rules[i], rules[i + 1]);
                changed = true;
            }
        }
    }
    if (diags) {
        for (size_t i = 0; i + 1 < rules.size(); i++)
            if (rule_alpha_equal(rules[i], rules[i + 1]))
                diags->push_back({Diagnostic::Warning,
                                  "duplicate rule " + rules[i + 1].label
                                      + " can never apply",
                                  rules[i + 1].line});
    }
    return rules;
}

// --- compilation ---

namespace {

const char * kAccessors[] = {"list_head", "list_tail", "list_last", "list_prefix"};

bool is_accessor(const std::string & name)
{
    for (const char * a : kAccessors)
        if (name == a) return true;
    return false;
}

struct Compiler {
    const Signature & sig;
    const PlannerOptions & opts;
    uint32_t arity;
    uint32_t next_slot = 0;
    uint32_t frame_max = 0;
    std::map<std::string, uint32_t> env;

    uint32_t alloc()
    {
        uint32_t s = next_slot++;
        frame_max = std::max(frame_max, next_slot);
        return s;
    }

    using K = std::function<NodePtr()>;

    NodePtr seq(NodePtr n, NodePtr rest)
    {
        n->then = std::move(rest);
        return n;
    }

    NodePtr guard(uint32_t slot, GuardKind g, NodePtr rest)
    {
        NodePtr n = mk_node(NodeKind::Guard);
        n->slot_a = slot;
        n->guard = g;
        return seq(n, std::move(rest));
    }

    NodePtr pattern(const ExprPtr & p, uint32_t slot, const K & k)
    {
        switch (p->kind) {
        case ExprKind::Var: {
            auto it = env.find(p->name);
            if (it == env.end()) {
                env[p->name] = slot;
                return k();
            }
            NodePtr n = mk_node(NodeKind::CheckEqual);
            n->slot_a = slot;
            n->slot_b = it->second;
            return seq(n, k());
        }
        case ExprKind::ListVar: {
            auto it = env.find(p->name);
            if (it != env.end()) {
                NodePtr n = mk_node(NodeKind::CheckEqual);
                n->slot_a = slot;
                n->slot_b = it->second;
                return seq(n, k());
            }
            env[p->name] = slot;
            if (p->name[0] == '+') return guard(slot, GuardKind::NonEmpty, k());
            return k();
        }
        case ExprKind::App: {
            NodePtr n = mk_node(NodeKind::CheckSym);
            n->slot_a = slot;
            n->sym = p->name;
            n->arity = static_cast<uint32_t>(p->args.size());
            std::function<NodePtr(size_t)> go = [&](size_t j) -> NodePtr {
                if (j == p->args.size()) return k();
                uint32_t s = alloc();
                NodePtr b = mk_node(NodeKind::BindArg);
                b->slot_a = slot;
                b->index = static_cast<uint32_t>(j);
                b->slot_b = s;
                return seq(b, pattern(p->args[j], s, [&, j] { return go(j + 1); }));
            };
            return seq(n, go(0));
        }
        case ExprKind::Null:
            return guard(slot, GuardKind::Empty, k());
        case ExprKind::List:
        case ExprKind::Conc: {
            std::vector<ExprPtr> its;
            flatten_items(p, its);
            return items(its, 0, slot, k);
        }
        }
        throw Error("bad pattern");
    }

    NodePtr items(const std::vector<ExprPtr> & its, size_t i, uint32_t cur, const K & k)
    {
        if (i == its.size()) return guard(cur, GuardKind::Empty, k());
        const ExprPtr & it = its[i];
        if (it->kind == ExprKind::ListVar) {
            if (env.count(it->name)) {
                // A repeated list variable: enumerate and compare.
                uint32_t pre = alloc(), rest = alloc();
                NodePtr n = mk_node(NodeKind::ListSplit);
                n->slot_a = cur;
                n->slot_b = pre;
                n->slot_c = rest;
                n->min_len = it->name[0] == '+' ? 1 : 0;
                NodePtr eq = mk_node(NodeKind::CheckEqual);
                eq->slot_a = pre;
                eq->slot_b = env[it->name];
                n->children = {seq(eq, items(its, i + 1, rest, k))};
                return n;
            }
            if (i + 1 == its.size()) {
                env[it->name] = cur;
                if (it->name[0] == '+') return guard(cur, GuardKind::NonEmpty, k());
                return k();
            }
            uint32_t pre = alloc(), rest = alloc();
            env[it->name] = pre;
            NodePtr n = mk_node(NodeKind::ListSplit);
            n->slot_a = cur;
            n->slot_b = pre;
            n->slot_c = rest;
            n->min_len = it->name[0] == '+' ? 1 : 0;
            n->children = {items(its, i + 1, rest, k)};
            return n;
        }
        uint32_t e = alloc(), t = alloc();
        NodePtr h = mk_node(NodeKind::Head);
        h->slot_a = cur;
        h->slot_b = e;
        NodePtr chain = seq(h, pattern(it, e, [&] {
                                NodePtr tl = mk_node(NodeKind::Tail);
                                tl->slot_a = cur;
                                tl->slot_b = t;
                                return seq(tl, items(its, i + 1, t, k));
                            }));
        return guard(cur, GuardKind::NonEmpty, std::move(chain));
    }

    EvalPtr expr(const ExprPtr & e)
    {
        switch (e->kind) {
        case ExprKind::Var:
        case ExprKind::ListVar: {
            auto it = env.find(e->name);
            if (it == env.end()) throw Error("unbound variable " + e->name + " in plan");
            return mk_slot(it->second);
        }
        case ExprKind::Null:
        case ExprKind::List:
        case ExprKind::Conc: {
            auto out = std::make_shared<EvalExpr>();
            out->kind = EvalExpr::K::MakeList;
            std::vector<ExprPtr> its;
            flatten_items(e, its);
            for (const ExprPtr & it : its) {
                if (it->kind == ExprKind::ListVar)
                    out->items.push_back({true, expr(it)});
                else
                    out->items.push_back({false, expr(it)});
            }
            return out;
        }
        case ExprKind::App: {
            auto out = std::make_shared<EvalExpr>();
            out->kind = EvalExpr::K::Make;
            out->sym = e->name;
            out->arity = static_cast<uint32_t>(e->args.size());
            for (const ExprPtr & a : e->args) out->args.push_back(expr(a));
            const SymbolDecl * d = sig.find(e->name, out->arity);
            if (d) {
                for (uint32_t p : d->delay_positions)
                    if (p < out->args.size()) mark_quoted(out->args[p]);
            }
            return out;
        }
        }
        throw Error("bad expression");
    }

    static void mark_quoted(const EvalPtr & e)
    {
        if (e->kind == EvalExpr::K::Make) {
            e->quoted = true;
            for (const EvalPtr & a : e->args) mark_quoted(a);
        } else if (e->kind == EvalExpr::K::MakeList) {
            for (const EvalExpr::Item & it : e->items) mark_quoted(it.e);
        }
    }

    NodePtr eval_to_slot(const ExprPtr & e, uint32_t & slot_out, const K & k)
    {
        if ((e->kind == ExprKind::Var || e->kind == ExprKind::ListVar) && env.count(e->name)) {
            slot_out = env[e->name];
            return k();
        }
        uint32_t s = alloc();
        slot_out = s;
        NodePtr n = mk_node(NodeKind::Eval);
        n->slot_a = s;
        n->expr = expr(e);
        return seq(n, k());
    }

    /* `t := not_empty_list(X)` and friends become dedicated instructions. */
    NodePtr accessor_cond(const Condition & c, const K & k, bool & handled)
    {
        handled = false;
        if (c.kind != CondKind::Assignment || c.rhs->kind != ExprKind::App) return nullptr;
        const std::string & fn = c.rhs->name;
        bool is_test = fn == "not_empty_list" || fn == "is_single_element";
        if (!is_test && !is_accessor(fn)) return nullptr;
        if (c.rhs->args.size() != 1) return nullptr;
        const ExprPtr & arg = c.rhs->args[0];
        if ((arg->kind != ExprKind::Var && arg->kind != ExprKind::ListVar)
            || !env.count(arg->name))
            return nullptr;
        uint32_t src = env[arg->name];
        handled = true;
        if (is_test) {
            bool want_true = c.lhs->kind == ExprKind::App && c.lhs->name == "t";
            bool want_false = c.lhs->kind == ExprKind::App && c.lhs->name == "f";
            if (!want_true && !want_false) throw Error("bad list test pattern");
            GuardKind g = fn == "is_single_element"
                ? GuardKind::Single
                : (want_true ? GuardKind::NonEmpty : GuardKind::Empty);
            if (fn == "is_single_element" && want_false)
                throw Error("unsupported negated is_single_element");
            return guard(src, g, k());
        }
        NodeKind nk = fn == "list_head" ? NodeKind::Head
            : fn == "list_tail"         ? NodeKind::Tail
            : fn == "list_last"         ? NodeKind::Last
                                        : NodeKind::Prefix;
        uint32_t dst = alloc();
        NodePtr n = mk_node(nk);
        n->slot_a = src;
        n->slot_b = dst;
        return seq(n, pattern(c.lhs, dst, k));
    }

    NodePtr conds(const std::vector<Condition> & cs, size_t i, const K & k)
    {
        if (i == cs.size()) return k();
        const Condition & c = cs[i];
        K next = [&] { return conds(cs, i + 1, k); };
        switch (c.kind) {
        case CondKind::Assignment: {
            bool handled = false;
            NodePtr n = accessor_cond(c, next, handled);
            if (handled) return n;
            uint32_t v = 0;
            return eval_to_slot(c.rhs, v, [&] { return pattern(c.lhs, v, next); });
        }
        case CondKind::Positive:
        case CondKind::Negative: {
            uint32_t a = 0, b = 0;
            return eval_to_slot(c.lhs, a, [&] {
                return eval_to_slot(c.rhs, b, [&]() -> NodePtr {
                    NodePtr n = mk_node(NodeKind::CheckEqual);
                    n->slot_a = a;
                    n->slot_b = b;
                    n->negate = c.kind == CondKind::Negative;
                    return seq(n, next());
                });
            });
        }
        }
        throw Error("bad condition");
    }

    NodePtr body(const BodyPtr & b)
    {
        if (b->is_term()) {
            NodePtr n = mk_node(NodeKind::Return);
            n->expr = expr(b->term);
            return n;
        }
        NodePtr alt = mk_node(NodeKind::Alt);
        for (const Alternative & a : b->alts)
            alt->children.push_back(conds(a.conds, 0, [&] { return body(a.body); }));
        if (b->else_body) alt->else_child = body(b->else_body);
        return alt;
    }

    std::vector<uint32_t> arg_order(const std::vector<Rule> & rules)
    {
        std::vector<uint32_t> order(arity);
        for (uint32_t i = 0; i < arity; i++) order[i] = i;
        if (!opts.reorder_args) return order;
        // Discriminating power: how many rules constrain this position.
        std::vector<int> score(arity, 0);
        for (const Rule & r : rules)
            for (uint32_t i = 0; i < arity && i < r.lhs->args.size(); i++)
                if (r.lhs->args[i]->kind != ExprKind::Var
                    && r.lhs->args[i]->kind != ExprKind::ListVar)
                    score[i]++;
        std::stable_sort(order.begin(), order.end(),
                         [&](uint32_t a, uint32_t b) { return score[a] > score[b]; });
        return order;
    }

    NodePtr rule(const Rule & r, const std::vector<uint32_t> & order)
    {
        env.clear();
        next_slot = arity;
        std::function<NodePtr(size_t)> go = [&](size_t j) -> NodePtr {
            if (j == order.size()) return conds(r.conds, 0, [&] { return body(r.rhs); });
            uint32_t i = order[j];
            return pattern(r.lhs->args[i], i, [&] { return go(j + 1); });
        };
        return go(0);
    }
};

} // namespace

RewritePlan compile_unit(const FunctionUnit & u, const Signature & sig,
                         const PlannerOptions & opts, std::vector<Diagnostic> * diags)
{
    RewritePlan plan;
    plan.name = u.name;
    plan.arity = u.arity;
    if (!u.is_constructor_unit) {
        plan.memo = u.decl().memo;
        plan.delay_positions = u.decl().delay_positions;
    }

    Compiler c{sig, opts, u.arity};
    std::vector<Rule> rules = order_rules(u.rules, diags);
    auto order = c.arg_order(rules);

    NodePtr root = mk_node(NodeKind::Alt);
    for (const Rule & r : rules) {
        root->children.push_back(c.rule(r, order));
        plan.rule_labels.push_back(r.label);
    }
    root->children.push_back(mk_node(NodeKind::Fallthrough));
    plan.root = root;
    plan.frame_size = std::max(c.frame_max, u.arity);
    return plan;
}

namespace {

void resolve_eval(const EvalPtr & e, const Program & prog, const Signature & sig,
                  std::vector<Diagnostic> * diags)
{
    if (!e) return;
    if (e->kind == EvalExpr::K::Make) {
        std::string key = e->sym + "/" + std::to_string(e->arity);
        auto it = prog.plan_index.find(key);
        if (it != prog.plan_index.end()) {
            e->target = static_cast<int32_t>(it->second);
        } else if (sig.is_constructor(e->sym, e->arity)) {
            e->target = -1;
        } else if (e->arity == 1 && (is_accessor(e->sym) || e->sym == "not_empty_list"
                                     || e->sym == "is_single_element")) {
            e->target = -2;
        } else if (extended_builtin_arity(e->sym) == e->arity) {
            e->target = -1; // t, f and friends build as plain constants
        } else if (sig.find(e->sym, e->arity)) {
            e->target = -1; // declared, no rules anywhere: stays constructor-like
        } else {
            if (diags)
                diags->push_back({Diagnostic::Error, "unresolved symbol " + key, 0});
            e->target = -1;
        }
        for (const EvalPtr & a : e->args) resolve_eval(a, prog, sig, diags);
    } else if (e->kind == EvalExpr::K::MakeList) {
        for (const EvalExpr::Item & it : e->items) resolve_eval(it.e, prog, sig, diags);
    }
}

void resolve_node(const NodePtr & n, const Program & prog, const Signature & sig,
                  std::vector<Diagnostic> * diags)
{
    if (!n) return;
    resolve_eval(n->expr, prog, sig, diags);
    for (const EvalPtr & a : n->call_args) resolve_eval(a, prog, sig, diags);
    for (const NodePtr & c : n->children) resolve_node(c, prog, sig, diags);
    resolve_node(n->else_child, prog, sig, diags);
    resolve_node(n->then, prog, sig, diags);
}

} // namespace

void resolve_program(Program & prog, const Signature & sig, std::vector<Diagnostic> * diags)
{
    std::vector<Diagnostic> local;
    std::vector<Diagnostic> * d = diags ? diags : &local;
    for (const RewritePlan & p : prog.plans) resolve_node(p.root, prog, sig, d);
    for (const Diagnostic & diag : *d)
        if (diag.level == Diagnostic::Error) throw Error("link failed: " + diag.message);
}

Program link_program(const std::vector<FunctionUnit> & units, const Signature & sig,
                     const PlannerOptions & opts, std::vector<Diagnostic> * diags)
{
    Program prog;
    prog.signature = sig;

    std::vector<const FunctionUnit *> fns;
    for (const FunctionUnit & u : units) {
        if (u.is_constructor_unit) {
            for (const SymbolDecl & d : u.symbols) prog.constructors.push_back(d);
            continue;
        }
        fns.push_back(&u);
    }
    // Load-order independence: plans sorted by key.
    std::sort(fns.begin(), fns.end(), [](const FunctionUnit * a, const FunctionUnit * b) {
        return std::tie(a->name, a->arity) < std::tie(b->name, b->arity);
    });
    for (size_t i = 0; i + 1 < fns.size(); i++)
        if (fns[i]->name == fns[i + 1]->name && fns[i]->arity == fns[i + 1]->arity)
            throw Error("duplicate function unit " + fns[i]->name + "/"
                        + std::to_string(fns[i]->arity));

    for (const FunctionUnit * u : fns) {
        prog.plan_index[u->name + "/" + std::to_string(u->arity)] = prog.plans.size();
        prog.plans.push_back(compile_unit(*u, sig, opts, diags));
    }
    resolve_program(prog, sig, diags);
    return prog;
}

} // namespace rwc
