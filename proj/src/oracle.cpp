#include "rwc/oracle.hpp"

#include <algorithm>
#include <functional>

namespace rwc {

namespace {

/* Flattens a list pattern into items; every operand of conc that is not
   itself list-structured is an element. */
void flatten_pattern(const ExprPtr & e, std::vector<ExprPtr> & items)
{
    switch (e->kind) {
    case ExprKind::Null:
        return;
    case ExprKind::List:
        items.push_back(e->args[0]);
        return;
    case ExprKind::Conc:
        flatten_pattern(e->args[0], items);
        flatten_pattern(e->args[1], items);
        return;
    default:
        items.push_back(e);
        return;
    }
}

bool seq_equal(TermStore & st, const std::vector<Term> & a, const std::vector<Term> & b)
{
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); i++)
        if (!st.term_equal(a[i], b[i])) return false;
    return true;
}

using Sink = std::function<void(const Binding &)>;

void match_one(TermStore & st, const ExprPtr & p, Term s, const Binding & b, const Sink & k);

void match_items(TermStore & st, const std::vector<ExprPtr> & items, size_t i,
                 const std::vector<Term> & elems, size_t lo, const Binding & b, const Sink & k)
{
    if (i == items.size()) {
        if (lo == elems.size()) k(b);
        return;
    }
    const ExprPtr & it = items[i];
    if (it->kind == ExprKind::ListVar) {
        auto bound = b.lists.find(it->name);
        if (bound != b.lists.end()) {
            size_t len = bound->second.size();
            if (lo + len > elems.size()) return;
            for (size_t j = 0; j < len; j++)
                if (!st.term_equal(elems[lo + j], bound->second[j])) return;
            match_items(st, items, i + 1, elems, lo + len, b, k);
            return;
        }
        size_t min_len = it->name[0] == '+' ? 1 : 0;
        for (size_t len = min_len; len + lo <= elems.size(); len++) {
            Binding b2 = b;
            b2.lists[it->name].assign(elems.begin() + static_cast<long>(lo),
                                      elems.begin() + static_cast<long>(lo + len));
            match_items(st, items, i + 1, elems, lo + len, b2, k);
        }
        return;
    }
    if (lo >= elems.size()) return;
    match_one(st, it, elems[lo], b,
              [&](const Binding & b2) { match_items(st, items, i + 1, elems, lo + 1, b2, k); });
}

void match_one(TermStore & st, const ExprPtr & p, Term s, const Binding & b, const Sink & k)
{
    switch (p->kind) {
    case ExprKind::Var: {
        auto it = b.vars.find(p->name);
        if (it != b.vars.end()) {
            if (st.term_equal(it->second, s)) k(b);
            return;
        }
        Binding b2 = b;
        b2.vars[p->name] = s;
        k(b2);
        return;
    }
    case ExprKind::ListVar: {
        if (!st.is_list(s)) return;
        auto elems = st.list_elements(s);
        if (p->name[0] == '+' && elems.empty()) return;
        auto it = b.lists.find(p->name);
        if (it != b.lists.end()) {
            if (seq_equal(st, it->second, elems)) k(b);
            return;
        }
        Binding b2 = b;
        b2.lists[p->name] = std::move(elems);
        k(b2);
        return;
    }
    case ExprKind::App: {
        if (st.kind(s) != TermKind::Application) return;
        const SymbolInfo & si = st.symbol(st.app_symbol(s));
        if (si.name != p->name || si.arity != p->args.size()) return;
        std::function<void(size_t, const Binding &)> go = [&](size_t i, const Binding & bi) {
            if (i == p->args.size()) {
                k(bi);
                return;
            }
            match_one(st, p->args[i], st.app_arg(s, static_cast<uint32_t>(i)), bi,
                      [&, i](const Binding & b2) { go(i + 1, b2); });
        };
        go(0, b);
        return;
    }
    case ExprKind::List:
    case ExprKind::Conc:
    case ExprKind::Null: {
        if (!st.is_list(s)) return;
        std::vector<ExprPtr> items;
        flatten_pattern(p, items);
        match_items(st, items, 0, st.list_elements(s), 0, b, k);
        return;
    }
    }
}

void gather_elements(TermStore & st, const ExprPtr & e, const Binding & b,
                     std::vector<Term> & out)
{
    switch (e->kind) {
    case ExprKind::Null:
        return;
    case ExprKind::List:
        gather_elements(st, e->args[0], b, out);
        return;
    case ExprKind::Conc:
        gather_elements(st, e->args[0], b, out);
        gather_elements(st, e->args[1], b, out);
        return;
    case ExprKind::ListVar: {
        auto it = b.lists.find(e->name);
        if (it == b.lists.end()) throw Error("unbound list variable " + e->name);
        out.insert(out.end(), it->second.begin(), it->second.end());
        return;
    }
    default:
        out.push_back(oracle_instantiate(st, e, b));
        return;
    }
}

} // namespace

std::vector<Binding> oracle_match(TermStore & store, const ExprPtr & pattern, Term subject,
                                  const Binding & seed)
{
    std::vector<Binding> out;
    match_one(store, pattern, subject, seed, [&](const Binding & b) { out.push_back(b); });
    return out;
}

Term oracle_instantiate(TermStore & store, const ExprPtr & e, const Binding & b)
{
    switch (e->kind) {
    case ExprKind::Var: {
        auto it = b.vars.find(e->name);
        if (it == b.vars.end()) throw Error("unbound variable " + e->name);
        return it->second;
    }
    case ExprKind::ListVar:
    case ExprKind::List:
    case ExprKind::Conc:
    case ExprKind::Null: {
        std::vector<Term> elems;
        gather_elements(store, e, b, elems);
        return store.list_from(elems);
    }
    case ExprKind::App: {
        std::vector<Term> args;
        args.reserve(e->args.size());
        for (const ExprPtr & a : e->args) args.push_back(oracle_instantiate(store, a, b));
        SymbolId s = store.intern_symbol(e->name, static_cast<uint32_t>(e->args.size()));
        return store.make_app(s, args);
    }
    }
    throw Error("bad expression");
}

// --- rule ordering by specificity ---

namespace {

struct Subst {
    std::map<std::string, std::string> v; // var name -> printed pattern
};

bool covers_expr(const ExprPtr & g, const ExprPtr & s, Subst & sub);

bool covers_items(const std::vector<ExprPtr> & g, size_t i, const std::vector<ExprPtr> & s,
                  size_t lo, Subst sub, const std::function<bool(Subst &)> & k)
{
    if (i == g.size()) return lo == s.size() && k(sub);
    const ExprPtr & it = g[i];
    if (it->kind == ExprKind::ListVar) {
        size_t min_len = it->name[0] == '+' ? 1 : 0;
        for (size_t len = min_len; lo + len <= s.size(); len++) {
            Subst s2 = sub;
            std::string key;
            for (size_t j = 0; j < len; j++) key += print_expr(*s[lo + j]) + ";";
            auto f = s2.v.find(it->name);
            if (f != s2.v.end() && f->second != key) continue;
            s2.v[it->name] = key;
            if (covers_items(g, i + 1, s, lo + len, s2, k)) return true;
        }
        return false;
    }
    if (lo >= s.size() || s[lo]->kind == ExprKind::ListVar) return false;
    Subst s2 = sub;
    if (!covers_expr(it, s[lo], s2)) return false;
    return covers_items(g, i + 1, s, lo + 1, s2, k);
}

bool covers_expr(const ExprPtr & g, const ExprPtr & s, Subst & sub)
{
    if (g->kind == ExprKind::Var) {
        if (s->kind == ExprKind::ListVar) return false;
        std::string key = print_expr(*s);
        auto f = sub.v.find(g->name);
        if (f != sub.v.end()) return f->second == key;
        sub.v[g->name] = key;
        return true;
    }
    if (is_list_expr(*g)) {
        if (!is_list_expr(*s)) return false;
        std::vector<ExprPtr> gi, si;
        flatten_pattern(g, gi);
        flatten_pattern(s, si);
        Subst out = sub;
        bool ok = covers_items(gi, 0, si, 0, sub, [&](Subst & fin) {
            out = fin;
            return true;
        });
        if (ok) sub = out;
        return ok;
    }
    if (g->kind != ExprKind::App) return false;
    if (s->kind != ExprKind::App || s->name != g->name || s->args.size() != g->args.size())
        return false;
    for (size_t i = 0; i < g->args.size(); i++)
        if (!covers_expr(g->args[i], s->args[i], sub)) return false;
    return true;
}

/* True if every instance of `a` is an instance of `b` (b is as general). */
bool covers_rule_lhs(const ExprPtr & general, const ExprPtr & specific)
{
    Subst sub;
    return covers_expr(general, specific, sub);
}

} // namespace

std::vector<Rule> oracle_order(std::vector<Rule> rules)
{
    std::stable_partition(rules.begin(), rules.end(),
                          [](const Rule & r) { return !r.is_default; });
    // Bubble more-specific rules ahead; incomparable rules keep textual order.
    bool changed = true;
    size_t guard = rules.size() + 1;
    while (changed && guard--) {
        changed = false;
        for (size_t i = 0; i + 1 < rules.size(); i++) {
            if (rules[i].is_default || rules[i + 1].is_default) continue;
            bool right_more_specific = covers_rule_lhs(rules[i].lhs, rules[i + 1].lhs)
                && !covers_rule_lhs(rules[i + 1].lhs, rules[i].lhs);
            if (right_more_specific) {
                std::swap(rules[i], rules[i + 1]);
                changed = true;
            }
        }
    }
    return rules;
}

// --- the interpreter ---

Oracle::Oracle(TermStore & store, const CollectResult & program, uint64_t step_limit)
    : store_(store), step_limit_(step_limit)
{
    for (const FunctionUnit & u : program.units) {
        if (u.is_constructor_unit) continue;
        rules_[u.name + "/" + std::to_string(u.arity)] = oracle_order(u.rules);
    }
}

bool Oracle::is_ground(const ExprPtr & e, const Binding & b) const
{
    bool ok = true;
    visit_vars(e, [&](const std::string & n) {
        bool lv = n[0] == '*' || n[0] == '+';
        ok &= lv ? b.lists.count(n) > 0 : b.vars.count(n) > 0;
    });
    return ok;
}

std::optional<Binding> Oracle::solve(const std::vector<Condition> & conds, size_t i, Binding b)
{
    if (i == conds.size()) return b;
    const Condition & c = conds[i];
    switch (c.kind) {
    case CondKind::Positive: {
        bool gl = is_ground(c.lhs, b), gr = is_ground(c.rhs, b);
        if (gl && gr) {
            Term l = normalize(oracle_instantiate(store_, c.lhs, b));
            Term r = normalize(oracle_instantiate(store_, c.rhs, b));
            if (!store_.term_equal(l, r)) return std::nullopt;
            return solve(conds, i + 1, std::move(b));
        }
        if (!gl && !gr) throw Error("condition with new variables on both sides");
        const ExprPtr & pat = gl ? c.rhs : c.lhs;
        const ExprPtr & val = gl ? c.lhs : c.rhs;
        Term v = normalize(oracle_instantiate(store_, val, b));
        for (const Binding & b2 : oracle_match(store_, pat, v, b))
            if (auto res = solve(conds, i + 1, b2)) return res;
        return std::nullopt;
    }
    case CondKind::Negative: {
        Term l = normalize(oracle_instantiate(store_, c.lhs, b));
        Term r = normalize(oracle_instantiate(store_, c.rhs, b));
        if (store_.term_equal(l, r)) return std::nullopt;
        return solve(conds, i + 1, std::move(b));
    }
    case CondKind::Assignment: {
        Term v = normalize(oracle_instantiate(store_, c.rhs, b));
        for (const Binding & b2 : oracle_match(store_, c.lhs, v, b))
            if (auto res = solve(conds, i + 1, b2)) return res;
        return std::nullopt;
    }
    }
    return std::nullopt;
}

std::optional<Term> Oracle::rewrite_root(Term t)
{
    const SymbolInfo & si = store_.symbol(store_.app_symbol(t));
    auto it = rules_.find(si.name + "/" + std::to_string(si.arity));
    if (it == rules_.end()) return std::nullopt;
    for (const Rule & r : it->second) {
        for (const Binding & b : oracle_match(store_, r.lhs, t)) {
            if (auto solved = solve(r.conds, 0, b)) {
                if (++steps_ > step_limit_)
                    throw ResourceError("oracle step limit exceeded");
                if (!r.rhs->is_term()) throw Error("oracle requires plain rule bodies");
                return oracle_instantiate(store_, r.rhs->term, *solved);
            }
        }
    }
    return std::nullopt;
}

Term Oracle::normalize(Term t)
{
    auto hit = cache_.find(t.id);
    if (hit != cache_.end()) return hit->second;
    Term nf;
    switch (store_.kind(t)) {
    case TermKind::EmptyList:
        nf = t;
        break;
    case TermKind::ListNode: {
        auto elems = store_.list_elements(t);
        for (Term & e : elems) e = normalize(e);
        nf = store_.list_from(elems);
        break;
    }
    case TermKind::Application: {
        uint32_t n = store_.app_arity(t);
        std::vector<Term> args;
        args.reserve(n);
        for (uint32_t i = 0; i < n; i++) args.push_back(normalize(store_.app_arg(t, i)));
        Term rebuilt = store_.make_app(store_.app_symbol(t), args);
        auto c2 = cache_.find(rebuilt.id);
        if (c2 != cache_.end()) {
            nf = c2->second;
            break;
        }
        auto red = rewrite_root(rebuilt);
        nf = red ? normalize(*red) : rebuilt;
        cache_[rebuilt.id] = nf;
        break;
    }
    }
    cache_[t.id] = nf;
    return nf;
}

bool Oracle::has_redex(Term t)
{
    switch (store_.kind(t)) {
    case TermKind::EmptyList:
        return false;
    case TermKind::ListNode: {
        for (Term e : store_.list_elements(t))
            if (has_redex(e)) return true;
        return false;
    }
    case TermKind::Application: {
        for (uint32_t i = 0; i < store_.app_arity(t); i++)
            if (has_redex(store_.app_arg(t, i))) return true;
        return rewrite_root(t).has_value();
    }
    }
    return false;
}

} // namespace rwc
