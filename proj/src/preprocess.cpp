#include "rwc/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

namespace rwc {

namespace {

// --- fresh name generation ---

void visit_body_vars(const BodyPtr & b, const std::function<void(const std::string &)> & fn)
{
    if (!b) return;
    if (b->is_term()) {
        visit_vars(b->term, fn);
        return;
    }
    for (const Alternative & a : b->alts) {
        for (const Condition & c : a.conds) {
            visit_vars(c.lhs, fn);
            visit_vars(c.rhs, fn);
        }
        visit_body_vars(a.body, fn);
    }
    visit_body_vars(b->else_body, fn);
}

std::set<std::string> rule_var_names(const Rule & r)
{
    std::set<std::string> out;
    auto add = [&](const std::string & n) { out.insert(n); };
    visit_vars(r.lhs, add);
    for (const Condition & c : r.conds) {
        visit_vars(c.lhs, add);
        visit_vars(c.rhs, add);
    }
    visit_body_vars(r.rhs, add);
    return out;
}

/* Picks a name not in `used`, preferring `base`, then base1, base2, ...
   `base` carries its list prefix ('*'/'+') if any. */
std::string fresh_name(const std::string & base, std::set<std::string> & used)
{
    if (!used.count(base)) {
        used.insert(base);
        return base;
    }
    for (int i = 1;; i++) {
        std::string cand = base + std::to_string(i);
        if (!used.count(cand)) {
            used.insert(cand);
            return cand;
        }
    }
}

/* Base for a fresh variable standing for pattern `e`: capitalized head
   letter for applications, "*L" for list patterns. */
std::string fresh_base_for(const Expr & e)
{
    if (is_list_expr(e)) return "*L";
    if (!e.name.empty() && std::isalpha(static_cast<unsigned char>(e.name[0])))
        return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(e.name[0]))));
    return "V";
}

bool is_constant(const Expr & e)
{
    return (e.kind == ExprKind::App && e.args.empty()) || e.kind == ExprKind::Null;
}

// --- substitution over conditions and bodies ---

Condition subst_cond(const Condition & c, const std::map<std::string, std::string> & ren)
{
    return {c.kind, substitute_vars(c.lhs, ren), substitute_vars(c.rhs, ren)};
}

BodyPtr subst_body(const BodyPtr & b, const std::map<std::string, std::string> & ren)
{
    if (!b) return b;
    if (b->is_term()) return mk_term_body(substitute_vars(b->term, ren));
    std::vector<Alternative> alts;
    for (const Alternative & a : b->alts) {
        Alternative na;
        for (const Condition & c : a.conds) na.conds.push_back(subst_cond(c, ren));
        na.body = subst_body(a.body, ren);
        alts.push_back(std::move(na));
    }
    return mk_group(std::move(alts), subst_body(b->else_body, ren));
}

// --- alpha matching with an extendable bijection ---

struct Matcher {
    const std::set<std::string> * bound = nullptr; // names that must match themselves
    std::map<std::string, std::string> fwd, bwd;

    bool var(const std::string & a, const std::string & b)
    {
        char pa = a.empty() ? ' ' : a[0];
        char pb = b.empty() ? ' ' : b[0];
        bool la = pa == '*' || pa == '+';
        bool lb = pb == '*' || pb == '+';
        if (la != lb || (la && pa != pb)) return false;
        if (bound && (bound->count(a) || bound->count(b))) return a == b;
        auto f = fwd.find(a);
        auto g = bwd.find(b);
        if (f == fwd.end() && g == bwd.end()) {
            fwd[a] = b;
            bwd[b] = a;
            return true;
        }
        return f != fwd.end() && g != bwd.end() && f->second == b && g->second == a;
    }

    bool expr(const ExprPtr & a, const ExprPtr & b)
    {
        if (!a || !b) return a == b;
        if (a->kind != b->kind || a->args.size() != b->args.size()) return false;
        if (a->kind == ExprKind::Var || a->kind == ExprKind::ListVar) return var(a->name, b->name);
        if (a->name != b->name) return false;
        for (size_t i = 0; i < a->args.size(); i++)
            if (!expr(a->args[i], b->args[i])) return false;
        return true;
    }

    bool cond(const Condition & a, const Condition & b)
    {
        return a.kind == b.kind && expr(a.lhs, b.lhs) && expr(a.rhs, b.rhs);
    }
};

/* Extends a partial renaming (from Matcher::bwd, mapping foreign names to
   canonical ones) so it covers all of `names`; names that would collide with
   `used` are freshened, the rest map to themselves. */
std::map<std::string, std::string> complete_renaming(const std::set<std::string> & names,
                                                     std::map<std::string, std::string> ren,
                                                     const std::set<std::string> & keep,
                                                     std::set<std::string> & used)
{
    for (const std::string & n : names) {
        if (ren.count(n) || keep.count(n)) continue;
        if (used.count(n)) {
            std::string base = n;
            while (base.size() > 1 && std::isdigit(static_cast<unsigned char>(base.back())))
                base.pop_back();
            ren[n] = fresh_name(base, used);
        } else {
            used.insert(n);
        }
    }
    for (auto & kv : ren) used.insert(kv.second);
    return ren;
}

std::set<std::string> alt_var_names(const Alternative & a)
{
    std::set<std::string> out;
    auto add = [&](const std::string & n) { out.insert(n); };
    for (const Condition & c : a.conds) {
        visit_vars(c.lhs, add);
        visit_vars(c.rhs, add);
    }
    visit_body_vars(a.body, add);
    return out;
}

Alternative subst_alt(const Alternative & a, const std::map<std::string, std::string> & ren)
{
    Alternative out;
    for (const Condition & c : a.conds) out.conds.push_back(subst_cond(c, ren));
    out.body = subst_body(a.body, ren);
    return out;
}

} // namespace

// --- collection ---

CollectResult collect_functions(const std::string & top_module, ModuleLoader & loader)
{
    CollectResult res;
    std::set<std::string> visiting, done;
    std::vector<const ModuleDef *> order;

    std::function<void(const std::string &)> visit = [&](const std::string & name) {
        if (done.count(name)) return;
        if (!visiting.insert(name).second)
            throw Error("import cycle involving module " + name);
        const ModuleDef & m = loader.load(name);
        for (const std::string & imp : m.imports) visit(imp);
        visiting.erase(name);
        done.insert(name);
        order.push_back(&m);
        res.module_order.push_back(m.name);
    };
    visit(top_module);

    for (const ModuleDef * m : order)
        for (const SymbolDecl & d : m->signature) res.signature.add(d);

    std::map<std::string, size_t> index; // "name/arity" -> unit index
    auto unit_for = [&](const std::string & name, uint32_t arity,
                        const std::string & module) -> FunctionUnit & {
        std::string key = name + "/" + std::to_string(arity);
        auto it = index.find(key);
        if (it == index.end()) {
            const SymbolDecl * d = res.signature.find(name, arity);
            if (!d) throw Error("rules given for undeclared symbol " + key);
            if (d->is_constructor)
                throw Error("rules given for constructor symbol " + key);
            FunctionUnit u;
            u.name = name;
            u.arity = arity;
            u.symbols = {*d};
            index[key] = res.units.size();
            res.units.push_back(std::move(u));
            it = index.find(key);
        }
        FunctionUnit & u = res.units[it->second];
        auto & om = u.origin_modules;
        if (std::find(om.begin(), om.end(), module) == om.end()) om.push_back(module);
        return u;
    };

    for (const ModuleDef * m : order) {
        std::vector<SymbolDecl> ctors;
        for (const SymbolDecl & d : m->signature) {
            if (d.is_constructor)
                ctors.push_back(*res.signature.find(d.name, d.arity));
            else
                unit_for(d.name, d.arity, m->name);
        }
        if (!ctors.empty()) {
            FunctionUnit u;
            u.name = m->name;
            u.is_constructor_unit = true;
            u.symbols = std::move(ctors);
            u.origin_modules = {m->name};
            res.units.push_back(std::move(u));
        }
        for (const Rule & r : m->rules) {
            if (!r.lhs || r.lhs->kind != ExprKind::App)
                throw Error("rule left-hand side must be a function application");
            unit_for(r.lhs->name, static_cast<uint32_t>(r.lhs->args.size()), m->name)
                .rules.push_back(r);
        }
    }

    for (FunctionUnit & u : res.units)
        std::stable_partition(u.rules.begin(), u.rules.end(),
                              [](const Rule & r) { return !r.is_default; });
    return res;
}

// --- step: linearization of left-hand sides ---

Rule linearize(const Rule & r, const Signature & sig)
{
    std::map<std::string, int> count;
    visit_vars(r.lhs, [&](const std::string & n) { count[n]++; });
    bool any = false;
    for (auto & kv : count) any |= kv.second > 1;
    if (!any) return r;

    const SymbolDecl * d = sig.find(r.lhs->name, static_cast<uint32_t>(r.lhs->args.size()));
    if (d) {
        for (uint32_t p : d->delay_positions) {
            if (p >= r.lhs->args.size()) continue;
            bool bad = false;
            visit_vars(r.lhs->args[p], [&](const std::string & n) { bad |= count[n] > 1; });
            if (bad)
                throw Error("rule " + (r.label.empty() ? r.lhs->name : r.label)
                            + ": repeated variable in delayed argument " + std::to_string(p));
        }
    }

    std::set<std::string> used = rule_var_names(r);
    std::set<std::string> seen;
    std::vector<Condition> eqs;

    std::function<ExprPtr(const ExprPtr &)> walk = [&](const ExprPtr & e) -> ExprPtr {
        if (!e) return e;
        if (e->kind == ExprKind::Var || e->kind == ExprKind::ListVar) {
            if (count[e->name] < 2 || seen.insert(e->name).second) return e;
            std::string nn = fresh_name(e->name, used);
            ExprPtr orig = e, repl;
            if (e->kind == ExprKind::Var)
                repl = mk_var(nn);
            else
                repl = mk_list_var(nn);
            eqs.push_back({CondKind::Positive, orig, repl});
            return repl;
        }
        if (e->args.empty()) return e;
        auto out = std::make_shared<Expr>(*e);
        for (ExprPtr & a : out->args) a = walk(a);
        return out;
    };

    Rule out = r;
    out.lhs = walk(r.lhs);
    out.conds.clear();
    out.conds.insert(out.conds.end(), eqs.begin(), eqs.end());
    out.conds.insert(out.conds.end(), r.conds.begin(), r.conds.end());
    return out;
}

// --- step: turn binding equalities into assignments ---

Rule introduce_assignments(const Rule & r)
{
    std::set<std::string> bound;
    visit_vars(r.lhs, [&](const std::string & n) { bound.insert(n); });

    auto new_vars = [&](const ExprPtr & e) {
        std::vector<std::string> fresh;
        visit_vars(e, [&](const std::string & n) {
            if (!bound.count(n)) fresh.push_back(n);
        });
        return fresh;
    };

    Rule out = r;
    out.conds.clear();
    for (const Condition & c : r.conds) {
        switch (c.kind) {
        case CondKind::Positive: {
            auto nl = new_vars(c.lhs), nr = new_vars(c.rhs);
            if (nl.empty() && nr.empty()) {
                out.conds.push_back(c);
            } else if (nr.empty()) {
                out.conds.push_back({CondKind::Assignment, c.lhs, c.rhs});
                for (auto & n : nl) bound.insert(n);
            } else if (nl.empty()) {
                out.conds.push_back({CondKind::Assignment, c.rhs, c.lhs});
                for (auto & n : nr) bound.insert(n);
            } else {
                throw Error("rule " + (r.label.empty() ? r.lhs->name : r.label)
                            + ": condition introduces new variables on both sides");
            }
            break;
        }
        case CondKind::Negative: {
            if (!new_vars(c.lhs).empty() || !new_vars(c.rhs).empty())
                throw Error("rule " + (r.label.empty() ? r.lhs->name : r.label)
                            + ": new variable in negative condition");
            out.conds.push_back(c);
            break;
        }
        case CondKind::Assignment: {
            out.conds.push_back(c);
            visit_vars(c.lhs, [&](const std::string & n) { bound.insert(n); });
            break;
        }
        }
    }
    return out;
}

// --- step: hoist constructor-only arguments ---

namespace {

bool constructor_only(const ExprPtr & e, const Signature & sig)
{
    switch (e->kind) {
    case ExprKind::Var:
    case ExprKind::ListVar:
        return false;
    case ExprKind::Null:
        return true;
    case ExprKind::List:
    case ExprKind::Conc: {
        for (const ExprPtr & a : e->args)
            if (!constructor_only(a, sig)) return false;
        return true;
    }
    case ExprKind::App: {
        if (!sig.is_constructor(e->name, static_cast<uint32_t>(e->args.size()))) return false;
        for (const ExprPtr & a : e->args)
            if (!constructor_only(a, sig)) return false;
        return true;
    }
    }
    return false;
}

} // namespace

Rule eliminate_constructor_args(const Rule & r, const Signature & sig)
{
    std::set<std::string> used = rule_var_names(r);
    std::vector<Condition> pre;
    auto lhs = std::make_shared<Expr>(*r.lhs);
    bool changed = false;
    for (ExprPtr & a : lhs->args) {
        if (is_constant(*a) || !constructor_only(a, sig)) continue;
        std::string v = fresh_name(fresh_base_for(*a), used);
        pre.push_back({CondKind::Assignment, mk_var(v), a});
        a = mk_var(v);
        changed = true;
    }
    if (!changed) return r;
    Rule out = r;
    out.lhs = lhs;
    out.conds.clear();
    out.conds.insert(out.conds.end(), pre.begin(), pre.end());
    out.conds.insert(out.conds.end(), r.conds.begin(), r.conds.end());
    return out;
}

// --- step: flatten assignment patterns ---

Rule simplify_assignment_patterns(const Rule & r)
{
    std::set<std::string> used = rule_var_names(r);
    Rule out = r;
    out.conds.clear();

    for (const Condition & c : r.conds) {
        if (c.kind != CondKind::Assignment || is_list_expr(*c.lhs)) {
            out.conds.push_back(c);
            continue;
        }
        // FIFO queue: a pattern's own assignment precedes those of its parts.
        std::vector<Condition> work{c};
        for (size_t k = 0; k < work.size(); k++) {
            Condition cur = work[k];
            if (cur.lhs->kind == ExprKind::Var || cur.lhs->kind == ExprKind::ListVar
                || is_constant(*cur.lhs)) {
                out.conds.push_back(cur);
                continue;
            }
            if (is_list_expr(*cur.lhs)) {
                // List patterns are handled by the list-pattern step.
                out.conds.push_back(cur);
                continue;
            }
            auto p = std::make_shared<Expr>(*cur.lhs);
            for (ExprPtr & a : p->args) {
                if (a->kind == ExprKind::Var || a->kind == ExprKind::ListVar) continue;
                std::string v = fresh_name(fresh_base_for(*a), used);
                ExprPtr repl = is_list_expr(*a) ? mk_list_var(v) : mk_var(v);
                work.push_back({CondKind::Assignment, a, repl});
                a = repl;
            }
            cur.lhs = p;
            out.conds.push_back(cur);
        }
    }
    return out;
}

// --- step: simplify list patterns ---

namespace {

void flatten_list(const ExprPtr & e, std::vector<ExprPtr> & items)
{
    switch (e->kind) {
    case ExprKind::Null:
        return;
    case ExprKind::List:
        items.push_back(e->args[0]);
        return;
    case ExprKind::Conc:
        flatten_list(e->args[0], items);
        flatten_list(e->args[1], items);
        return;
    default:
        items.push_back(e); // list variable, or an element via List
        return;
    }
}

ExprPtr rebuild_list(const std::vector<ExprPtr> & items)
{
    if (items.empty()) return mk_null();
    if (items.size() == 1)
        return items[0]->kind == ExprKind::ListVar ? items[0] : mk_list1(items[0]);
    // conc operands are bare elements or list variables
    ExprPtr out = items.back();
    for (size_t i = items.size() - 1; i-- > 0;) out = mk_conc(items[i], out);
    return out;
}

size_t count_list_vars(const std::vector<ExprPtr> & items)
{
    size_t n = 0;
    for (const ExprPtr & it : items) n += it->kind == ExprKind::ListVar;
    return n;
}

ExprPtr lv(const std::string & name) { return mk_list_var(name); }
ExprPtr acc(const char * op, const ExprPtr & arg) { return mk_app(op, {arg}); }
Condition assign(ExprPtr pat, ExprPtr val) { return {CondKind::Assignment, pat, val}; }

/* Replace complex list elements by fresh variables bound in new assignment
   conditions (returned in `hoists`). */
std::vector<ExprPtr> simplify_elements(const std::vector<ExprPtr> & items,
                                       std::vector<Condition> & hoists,
                                       std::set<std::string> & used)
{
    std::vector<ExprPtr> out;
    for (const ExprPtr & it : items) {
        if (it->kind == ExprKind::Var || it->kind == ExprKind::ListVar || is_constant(*it)) {
            out.push_back(it);
            continue;
        }
        std::string v = fresh_name(is_list_expr(*it) ? "L" : fresh_base_for(*it), used);
        hoists.push_back(assign(it, mk_var(v)));
        out.push_back(mk_var(v));
    }
    return out;
}

/* Base name for the variable that replaces a whole list pattern: reuse the
   pattern's single list variable (digits stripped) when there is one. */
std::string cursor_base(const std::vector<ExprPtr> & items)
{
    for (const ExprPtr & it : items)
        if (it->kind == ExprKind::ListVar) {
            std::string base = "*" + it->name.substr(1); // cursors may be empty
            while (base.size() > 2 && std::isdigit(static_cast<unsigned char>(base.back())))
                base.pop_back();
            return base;
        }
    return "*L";
}

/* Emit accessor conditions matching simple items (variables, constants, at
   most one list variable) against the list held in cursor variable `cv`. */
std::vector<Condition> decompose(const std::vector<ExprPtr> & items, const std::string & cv,
                                 std::set<std::string> & used)
{
    std::vector<Condition> out;
    size_t lvpos = items.size();
    for (size_t i = 0; i < items.size(); i++)
        if (items[i]->kind == ExprKind::ListVar) {
            lvpos = i;
            break;
        }

    // Whole pattern is a single element: a dedicated test suffices.
    if (lvpos == items.size() && items.size() == 1) {
        out.push_back(assign(mk_app("t"), acc("is_single_element", lv(cv))));
        out.push_back(assign(items[0], acc("list_head", lv(cv))));
        return out;
    }

    std::string cur = cv;
    // Leading elements, left to right.
    for (size_t i = 0; i < lvpos && i < items.size(); i++) {
        out.push_back(assign(mk_app("t"), acc("not_empty_list", lv(cur))));
        out.push_back(assign(items[i], acc("list_head", lv(cur))));
        if (lvpos == items.size() - 1 && i + 1 == lvpos) {
            // The rest is exactly the list variable: bind it to the tail.
            out.push_back(assign(items[lvpos], acc("list_tail", lv(cur))));
            if (items[lvpos]->name[0] == '+')
                out.push_back(assign(mk_app("t"), acc("not_empty_list", items[lvpos])));
            return out;
        }
        std::string next = fresh_name("*L", used);
        out.push_back(assign(lv(next), acc("list_tail", lv(cur))));
        cur = next;
    }

    if (lvpos == items.size()) {
        // No list variable: the final tail must be empty.
        out.push_back(assign(mk_app("f"), acc("not_empty_list", lv(cur))));
        return out;
    }

    // Trailing elements, right to left.
    for (size_t i = items.size(); i-- > lvpos + 1;) {
        out.push_back(assign(mk_app("t"), acc("not_empty_list", lv(cur))));
        out.push_back(assign(items[i], acc("list_last", lv(cur))));
        if (i == lvpos + 1) {
            out.push_back(assign(items[lvpos], acc("list_prefix", lv(cur))));
            if (items[lvpos]->name[0] == '+')
                out.push_back(assign(mk_app("t"), acc("not_empty_list", items[lvpos])));
            return out;
        }
        std::string next = fresh_name("*L", used);
        out.push_back(assign(lv(next), acc("list_prefix", lv(cur))));
        cur = next;
    }

    // No leading and no trailing: the pattern was the list variable alone.
    out.push_back(assign(items[lvpos], lv(cur)));
    if (items[lvpos]->name[0] == '+')
        out.push_back(assign(mk_app("t"), acc("not_empty_list", items[lvpos])));
    return out;
}

struct ListPass {
    std::set<std::string> used;
    bool elements_only; // phase A only

    /* Transforms list patterns found inside `e`; generated conditions go to
       `chains` (accessor decompositions, evaluated first) and `hoists`
       (element assignments, evaluated after all chains). */
    ExprPtr transform(const ExprPtr & e, std::vector<Condition> & chains,
                      std::vector<Condition> & hoists)
    {
        if (!e) return e;
        if (e->kind == ExprKind::Var || e->kind == ExprKind::ListVar) return e;
        if (e->kind == ExprKind::App) {
            if (e->args.empty()) return e;
            auto out = std::make_shared<Expr>(*e);
            for (ExprPtr & a : out->args) a = transform(a, chains, hoists);
            return out;
        }
        // A list pattern position.
        std::vector<ExprPtr> items;
        flatten_list(e, items);
        items = simplify_elements(items, hoists, used);
        size_t nlv = count_list_vars(items);
        if (elements_only || nlv >= 2) return rebuild_list(items);
        if (items.size() == 1 && nlv == 1) return items[0]; // degenerate conc
        std::string cv = fresh_name(cursor_base(items), used);
        std::vector<Condition> chain = decompose(items, cv, used);
        chains.insert(chains.end(), chain.begin(), chain.end());
        return lv(cv);
    }
};

Rule list_pass(const Rule & r, bool elements_only)
{
    ListPass lp{rule_var_names(r), elements_only};
    Rule out = r;
    out.conds.clear();

    std::vector<Condition> chains, hoists;
    out.lhs = lp.transform(r.lhs, chains, hoists);
    out.conds.insert(out.conds.end(), chains.begin(), chains.end());
    out.conds.insert(out.conds.end(), hoists.begin(), hoists.end());

    for (const Condition & c : r.conds) {
        if (c.kind != CondKind::Assignment) {
            out.conds.push_back(c);
            continue;
        }
        std::vector<Condition> ch, ho;
        if (is_list_expr(*c.lhs)) {
            std::vector<ExprPtr> items;
            flatten_list(c.lhs, items);
            items = simplify_elements(items, ho, lp.used);
            size_t nlv = count_list_vars(items);
            if (lp.elements_only || nlv >= 2) {
                out.conds.push_back({CondKind::Assignment, rebuild_list(items), c.rhs});
            } else if (items.size() == 1 && nlv == 1) {
                out.conds.push_back({CondKind::Assignment, items[0], c.rhs});
            } else {
                std::string cv = fresh_name(cursor_base(items), lp.used);
                out.conds.push_back({CondKind::Assignment, lv(cv), c.rhs});
                ch = decompose(items, cv, lp.used);
            }
        } else {
            Condition nc = c;
            nc.lhs = lp.transform(c.lhs, ch, ho);
            out.conds.push_back(nc);
        }
        out.conds.insert(out.conds.end(), ch.begin(), ch.end());
        out.conds.insert(out.conds.end(), ho.begin(), ho.end());
    }
    return out;
}

} // namespace

Rule simplify_list_elements(const Rule & r, const Signature & sig)
{
    (void)sig;
    return list_pass(r, true);
}

Rule simplify_list_patterns(const Rule & r, const Signature & sig)
{
    (void)sig;
    Rule cur = r;
    for (int i = 0; i < 64; i++) {
        Rule next = simplify_assignment_patterns(list_pass(cur, false));
        if (print_rule(next) == print_rule(cur)) return cur;
        cur = next;
    }
    throw Error("list pattern simplification did not converge");
}

// --- step: combine rules with a shared condition prefix ---

namespace {

std::vector<Alternative> factor_alts(std::vector<Alternative> alts,
                                     const std::set<std::string> & bound,
                                     std::set<std::string> & used)
{
    std::vector<Alternative> out;
    size_t i = 0;
    while (i < alts.size()) {
        const Alternative & first = alts[i];
        size_t j = i + 1;
        if (!first.conds.empty()) {
            while (j < alts.size() && !alts[j].conds.empty()) {
                Matcher m;
                m.bound = &bound;
                if (!m.cond(first.conds[0], alts[j].conds[0])) break;
                j++;
            }
        }
        if (j == i + 1) {
            out.push_back(first);
            i = j;
            continue;
        }

        // Maximal condition prefix shared by the whole run.
        size_t L = first.conds.size();
        for (size_t k = i + 1; k < j; k++) {
            size_t lk = 0;
            Matcher m;
            m.bound = &bound;
            while (lk < L && lk < alts[k].conds.size()
                   && m.cond(first.conds[lk], alts[k].conds[lk]))
                lk++;
            L = std::min(L, lk);
        }

        std::vector<Condition> prefix(first.conds.begin(),
                                      first.conds.begin() + static_cast<long>(L));
        std::set<std::string> bound2 = bound;
        for (const Condition & c : prefix) {
            visit_vars(c.lhs, [&](const std::string & n) { bound2.insert(n); });
            visit_vars(c.rhs, [&](const std::string & n) { bound2.insert(n); });
        }

        std::vector<Alternative> sub;
        for (size_t k = i; k < j; k++) {
            Alternative rest;
            rest.conds.assign(alts[k].conds.begin() + static_cast<long>(L),
                              alts[k].conds.end());
            rest.body = alts[k].body;
            if (k == i) {
                sub.push_back(rest);
                continue;
            }
            Matcher m;
            m.bound = &bound;
            for (size_t c = 0; c < L; c++) m.cond(first.conds[c], alts[k].conds[c]);
            sub.push_back(subst_alt(rest, complete_renaming(alt_var_names(rest), m.bwd,
                                                            bound, used)));
        }
        Alternative merged;
        merged.conds = std::move(prefix);
        merged.body = mk_group(factor_alts(std::move(sub), bound2, used));
        out.push_back(std::move(merged));
        i = j;
    }
    return out;
}

} // namespace

FunctionUnit combine_rules(FunctionUnit u)
{
    std::vector<Rule> out;
    size_t i = 0;
    while (i < u.rules.size()) {
        const Rule & base = u.rules[i];
        size_t j = i + 1;
        if (!base.is_default && !base.conds.empty()) {
            while (j < u.rules.size()) {
                const Rule & rj = u.rules[j];
                if (rj.is_default || rj.conds.empty()) break;
                Matcher m;
                if (!m.expr(base.lhs, rj.lhs) || !m.cond(base.conds[0], rj.conds[0])) break;
                j++;
            }
        }
        if (j == i + 1) {
            out.push_back(base);
            i = j;
            continue;
        }

        std::set<std::string> bound;
        visit_vars(base.lhs, [&](const std::string & n) { bound.insert(n); });
        std::set<std::string> used = rule_var_names(base);

        std::vector<Alternative> alts;
        std::string label = base.label;
        alts.push_back({base.conds, base.rhs});
        for (size_t k = i + 1; k < j; k++) {
            const Rule & rk = u.rules[k];
            Matcher m;
            m.expr(base.lhs, rk.lhs);
            Rule renamed = rk;
            auto ren = complete_renaming(rule_var_names(rk), m.bwd, {}, used);
            renamed.lhs = substitute_vars(rk.lhs, ren);
            renamed.conds.clear();
            for (const Condition & c : rk.conds) renamed.conds.push_back(subst_cond(c, ren));
            renamed.rhs = subst_body(rk.rhs, ren);
            alts.push_back({renamed.conds, renamed.rhs});
            if (!rk.label.empty()) label += (label.empty() ? "" : "+") + rk.label;
        }

        std::vector<Alternative> factored = factor_alts(std::move(alts), bound, used);
        if (factored.size() == 1) {
            Rule merged;
            merged.label = label;
            merged.lhs = base.lhs;
            merged.conds = factored[0].conds;
            merged.rhs = factored[0].body;
            merged.line = base.line;
            out.push_back(std::move(merged));
        } else {
            // The shared first condition did not survive full matching; keep
            // the originals.
            for (size_t k = i; k < j; k++) out.push_back(u.rules[k]);
        }
        i = j;
    }
    u.rules = std::move(out);
    return u;
}

// --- step: introduce else ---

namespace {

bool complementary(const Condition & a, const Condition & b)
{
    bool kinds_ok = (a.kind == CondKind::Positive && b.kind == CondKind::Negative)
        || (a.kind == CondKind::Negative && b.kind == CondKind::Positive);
    if (!kinds_ok) return false;
    return (expr_equal(a.lhs, b.lhs) && expr_equal(a.rhs, b.rhs))
        || (expr_equal(a.lhs, b.rhs) && expr_equal(a.rhs, b.lhs));
}

BodyPtr else_pass(const BodyPtr & b)
{
    if (!b || b->is_term()) return b;
    std::vector<Alternative> alts;
    for (const Alternative & a : b->alts) alts.push_back({a.conds, else_pass(a.body)});
    BodyPtr els = else_pass(b->else_body);

    if (!els && alts.size() >= 2) {
        const Alternative & then_alt = alts[alts.size() - 2];
        const Alternative & neg_alt = alts[alts.size() - 1];
        if (then_alt.conds.size() == 1 && then_alt.body->is_term() && !neg_alt.conds.empty()
            && complementary(then_alt.conds[0], neg_alt.conds[0])) {
            if (neg_alt.conds.size() == 1) {
                els = neg_alt.body;
            } else {
                Alternative rest;
                rest.conds.assign(neg_alt.conds.begin() + 1, neg_alt.conds.end());
                rest.body = neg_alt.body;
                els = mk_group({rest});
            }
            alts.pop_back();
        }
    }
    return mk_group(std::move(alts), els);
}

} // namespace

FunctionUnit introduce_else(FunctionUnit u)
{
    for (Rule & r : u.rules) r.rhs = else_pass(r.rhs);
    return u;
}

// --- whole pipeline ---

FunctionUnit preprocess_unit(const FunctionUnit & u, const Signature & sig)
{
    if (u.is_constructor_unit) return u;
    FunctionUnit out = u;
    out.rules.clear();
    for (Rule r : u.rules) {
        r = linearize(r, sig);
        r = introduce_assignments(r);
        r = eliminate_constructor_args(r, sig);
        r = simplify_assignment_patterns(r);
        r = simplify_list_patterns(r, sig);
        out.rules.push_back(std::move(r));
    }
    out = combine_rules(std::move(out));
    out = introduce_else(std::move(out));
    return out;
}

std::string print_unit(const FunctionUnit & u)
{
    std::string out;
    if (u.is_constructor_unit) {
        out += "constructors " + u.name + ":";
        for (const SymbolDecl & d : u.symbols)
            out += " " + d.name + "/" + std::to_string(d.arity);
        out += "\n";
        return out;
    }
    out += "function " + u.name + "/" + std::to_string(u.arity) + "\n";
    for (size_t i = 0; i < u.rules.size(); i++) {
        out += print_rule(u.rules[i]);
        out += i + 1 < u.rules.size() ? ";\n\n" : "\n";
    }
    return out;
}

} // namespace rwc
