#include "rwc/postprocess.hpp"

#include <map>

namespace rwc {

namespace {

void tre_walk(const NodePtr & n, int32_t self, RewritePlan & plan)
{
    if (!n) return;
    if (n->kind == NodeKind::Return && n->expr && n->expr->kind == EvalExpr::K::Make
        && !n->expr->quoted && n->expr->target == self) {
        n->kind = NodeKind::TailCall;
        n->call_args = n->expr->args;
        n->expr = nullptr;
        plan.has_loop = true;
        return;
    }
    for (const NodePtr & c : n->children) tre_walk(c, self, plan);
    tre_walk(n->else_child, self, plan);
    tre_walk(n->then, self, plan);
}

bool is_ground(const EvalExpr & e)
{
    switch (e.kind) {
    case EvalExpr::K::Slot:
    case EvalExpr::K::Const:
        return false;
    case EvalExpr::K::Make:
        for (const EvalPtr & a : e.args)
            if (!is_ground(*a)) return false;
        return true;
    case EvalExpr::K::MakeList:
        for (const EvalExpr::Item & it : e.items)
            if (!is_ground(*it.e)) return false;
        return true;
    }
    return false;
}

bool has_call(const EvalExpr & e)
{
    if (e.kind == EvalExpr::K::Make) {
        if (!e.quoted && (e.target >= 0 || e.target == -2)) return true;
        for (const EvalPtr & a : e.args)
            if (has_call(*a)) return true;
        return false;
    }
    if (e.kind == EvalExpr::K::MakeList) {
        for (const EvalExpr::Item & it : e.items)
            if (has_call(*it.e)) return true;
    }
    return false;
}

ExprPtr to_ast(const EvalExpr & e)
{
    switch (e.kind) {
    case EvalExpr::K::Make: {
        std::vector<ExprPtr> args;
        args.reserve(e.args.size());
        for (const EvalPtr & a : e.args) args.push_back(to_ast(*a));
        return mk_app(e.sym, std::move(args));
    }
    case EvalExpr::K::MakeList: {
        ExprPtr acc = mk_null();
        for (size_t i = e.items.size(); i-- > 0;) {
            const EvalExpr::Item & it = e.items[i];
            ExprPtr elem = to_ast(*it.e);
            if (it.splice)
                acc = acc->kind == ExprKind::Null ? elem : mk_conc(elem, acc);
            else if (acc->kind == ExprKind::Null)
                acc = mk_list1(elem);
            else
                acc = mk_conc(elem, acc);
        }
        return acc;
    }
    default:
        throw Error("constant hoisting hit a non-ground expression");
    }
}

struct ConstPool {
    Program & prog;
    std::map<std::string, uint32_t> index;

    void hoist(EvalPtr & e)
    {
        if (!e) return;
        if (e->kind == EvalExpr::K::Make && e->quoted) return; // built raw, leave alone
        if (is_ground(*e) && has_call(*e)) {
            ExprPtr ast = to_ast(*e);
            std::string key = print_expr(*ast);
            auto it = index.find(key);
            uint32_t idx;
            if (it == index.end()) {
                idx = static_cast<uint32_t>(prog.constants.size());
                prog.constants.push_back(ast);
                index.emplace(std::move(key), idx);
            } else {
                idx = it->second;
            }
            e = mk_const_ref(idx);
            return;
        }
        for (EvalPtr & a : e->args) hoist(a);
        for (EvalExpr::Item & it : e->items) hoist(it.e);
    }

    void walk(const NodePtr & n)
    {
        if (!n) return;
        hoist(n->expr);
        for (EvalPtr & a : n->call_args) hoist(a);
        for (const NodePtr & c : n->children) walk(c);
        walk(n->else_child);
        walk(n->then);
    }
};

} // namespace

void eliminate_tail_recursion(Program & p)
{
    for (size_t i = 0; i < p.plans.size(); i++)
        tre_walk(p.plans[i].root, static_cast<int32_t>(i), p.plans[i]);
}

void cache_constants(Program & p)
{
    ConstPool pool{p, {}};
    for (size_t i = 0; i < p.constants.size(); i++)
        pool.index.emplace(print_expr(*p.constants[i]), static_cast<uint32_t>(i));
    for (RewritePlan & plan : p.plans) pool.walk(plan.root);
}

void postprocess(Program & p, const PostprocessOptions & opts)
{
    if (opts.tail_recursion) eliminate_tail_recursion(p);
    if (opts.const_cache) cache_constants(p);
}

} // namespace rwc
