#include "rwc/ast.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace rwc {

ExprPtr mk_var(std::string name)
{
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Var;
    e->name = std::move(name);
    return e;
}

ExprPtr mk_list_var(std::string name_with_prefix)
{
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::ListVar;
    e->name = std::move(name_with_prefix);
    return e;
}

ExprPtr mk_app(std::string name, std::vector<ExprPtr> args)
{
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::App;
    e->name = std::move(name);
    e->args = std::move(args);
    return e;
}

ExprPtr mk_list1(ExprPtr x)
{
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::List;
    e->args = {std::move(x)};
    return e;
}

ExprPtr mk_conc(ExprPtr a, ExprPtr b)
{
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Conc;
    e->args = {std::move(a), std::move(b)};
    return e;
}

ExprPtr mk_null()
{
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Null;
    return e;
}

BodyPtr mk_term_body(ExprPtr e)
{
    auto b = std::make_shared<Body>();
    b->term = std::move(e);
    return b;
}

BodyPtr mk_group(std::vector<Alternative> alts, BodyPtr else_body)
{
    auto b = std::make_shared<Body>();
    b->alts = std::move(alts);
    b->else_body = std::move(else_body);
    return b;
}

void Signature::add(const SymbolDecl & decl)
{
    std::string key = decl.name + "/" + std::to_string(decl.arity);
    auto it = decls_.find(key);
    if (it == decls_.end()) {
        decls_[key] = decl;
    } else {
        it->second.is_constructor |= decl.is_constructor;
        it->second.memo |= decl.memo;
        for (uint32_t p : decl.delay_positions) {
            auto & dp = it->second.delay_positions;
            if (std::find(dp.begin(), dp.end(), p) == dp.end()) dp.push_back(p);
        }
    }
}

const SymbolDecl * Signature::find(const std::string & name, uint32_t arity) const
{
    auto it = decls_.find(name + "/" + std::to_string(arity));
    return it == decls_.end() ? nullptr : &it->second;
}

bool Signature::is_constructor(const std::string & name, uint32_t arity) const
{
    const SymbolDecl * d = find(name, arity);
    return d && d->is_constructor;
}

std::optional<uint32_t> extended_builtin_arity(const std::string & name)
{
    if (name == "list_head" || name == "list_tail" || name == "list_last"
        || name == "list_prefix" || name == "not_empty_list" || name == "is_single_element")
        return 1;
    if (name == "t" || name == "f") return 0;
    return std::nullopt;
}

// --- printing ---

std::string print_expr(const Expr & e)
{
    switch (e.kind) {
    case ExprKind::Var:
    case ExprKind::ListVar:
        return e.name;
    case ExprKind::Null:
        return "null";
    case ExprKind::List:
        return "list(" + print_expr(*e.args[0]) + ")";
    case ExprKind::Conc:
        return "conc(" + print_expr(*e.args[0]) + "," + print_expr(*e.args[1]) + ")";
    case ExprKind::App: {
        if (e.args.empty()) return e.name;
        std::string out = e.name + "(";
        for (size_t i = 0; i < e.args.size(); i++) {
            if (i) out += ",";
            out += print_expr(*e.args[i]);
        }
        return out + ")";
    }
    }
    return {};
}

std::string print_condition(const Condition & c)
{
    const char * op = c.kind == CondKind::Positive ? " == "
                    : c.kind == CondKind::Negative ? " != "
                                                   : " := ";
    return print_expr(*c.lhs) + op + print_expr(*c.rhs);
}

static std::string print_body(const Body & b, int indent);

static std::string ind(int n)
{
    return std::string(2 * n, ' ');
}

static std::string print_alt(const Alternative & a, int indent)
{
    std::string out;
    for (size_t i = 0; i < a.conds.size(); i++) {
        out += ind(indent) + print_condition(a.conds[i]);
        out += (i + 1 < a.conds.size()) ? " &\n" : "\n";
    }
    if (!a.conds.empty()) out += ind(indent) + "==>\n";
    out += print_body(*a.body, indent);
    return out;
}

static std::string print_body(const Body & b, int indent)
{
    if (b.is_term()) return ind(indent) + print_expr(*b.term);
    std::string out = ind(indent) + "{\n";
    for (size_t i = 0; i < b.alts.size(); i++) {
        out += print_alt(b.alts[i], indent + 1);
        if (i + 1 < b.alts.size()) out += ";\n";
    }
    if (b.else_body) {
        out += "\n" + ind(indent + 1) + "else\n";
        out += print_body(*b.else_body, indent + 1);
    }
    out += "\n" + ind(indent) + "}";
    return out;
}

std::string print_rule(const Rule & r)
{
    std::string out;
    if (!r.label.empty()) out += "[" + r.label + "]\n";
    for (size_t i = 0; i < r.conds.size(); i++) {
        out += print_condition(r.conds[i]);
        out += (i + 1 < r.conds.size()) ? " &\n" : "\n";
    }
    if (!r.conds.empty()) out += "==>\n";
    if (r.is_default) out += "default: ";
    out += print_expr(*r.lhs) + " =";
    if (r.rhs->is_term())
        out += " " + print_expr(*r.rhs->term);
    else
        out += "\n" + print_body(*r.rhs, 0);
    return out;
}

static std::string print_decl(const SymbolDecl & d)
{
    std::string out = d.name;
    if (d.arity > 0) {
        out += "(";
        for (uint32_t i = 0; i < d.arity; i++) out += i ? ",_" : "_";
        out += ")";
    }
    std::vector<std::string> attrs;
    if (d.is_constructor) attrs.push_back("constructor");
    if (d.memo) attrs.push_back("memo");
    if (!d.delay_positions.empty()) {
        std::string dl = "delay(";
        auto sorted = d.delay_positions;
        std::sort(sorted.begin(), sorted.end());
        for (size_t i = 0; i < sorted.size(); i++) dl += (i ? "," : "") + std::to_string(sorted[i]);
        attrs.push_back(dl + ")");
    }
    if (!attrs.empty()) {
        out += " {";
        for (size_t i = 0; i < attrs.size(); i++) out += (i ? "," : "") + attrs[i];
        out += "}";
    }
    return out;
}

std::string print_module(const ModuleDef & m)
{
    std::string out = "module " + m.name + "\n";
    if (!m.imports.empty()) {
        out += "imports ";
        for (size_t i = 0; i < m.imports.size(); i++) out += (i ? ", " : "") + m.imports[i];
        out += ";\n";
    }
    out += "signature\n";
    for (size_t i = 0; i < m.signature.size(); i++) {
        out += "  " + print_decl(m.signature[i]);
        out += (i + 1 < m.signature.size()) ? ";\n" : "\n";
    }
    out += "rules\n";
    for (size_t i = 0; i < m.rules.size(); i++) {
        out += print_rule(m.rules[i]);
        out += (i + 1 < m.rules.size()) ? ";\n\n" : "\n";
    }
    return out;
}

// --- equality ---

bool expr_equal(const ExprPtr & a, const ExprPtr & b)
{
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->name != b->name || a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); i++)
        if (!expr_equal(a->args[i], b->args[i])) return false;
    return true;
}

static bool cond_equal(const Condition & a, const Condition & b)
{
    return a.kind == b.kind && expr_equal(a.lhs, b.lhs) && expr_equal(a.rhs, b.rhs);
}

bool body_equal(const BodyPtr & a, const BodyPtr & b)
{
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->is_term() != b->is_term()) return false;
    if (a->is_term()) return expr_equal(a->term, b->term);
    if (a->alts.size() != b->alts.size()) return false;
    for (size_t i = 0; i < a->alts.size(); i++) {
        if (a->alts[i].conds.size() != b->alts[i].conds.size()) return false;
        for (size_t j = 0; j < a->alts[i].conds.size(); j++)
            if (!cond_equal(a->alts[i].conds[j], b->alts[i].conds[j])) return false;
        if (!body_equal(a->alts[i].body, b->alts[i].body)) return false;
    }
    if ((a->else_body == nullptr) != (b->else_body == nullptr)) return false;
    return !a->else_body || body_equal(a->else_body, b->else_body);
}

bool rule_equal(const Rule & a, const Rule & b)
{
    if (a.is_default != b.is_default || a.conds.size() != b.conds.size()) return false;
    for (size_t i = 0; i < a.conds.size(); i++)
        if (!cond_equal(a.conds[i], b.conds[i])) return false;
    return expr_equal(a.lhs, b.lhs) && body_equal(a.rhs, b.rhs);
}

bool module_equal(const ModuleDef & a, const ModuleDef & b)
{
    if (a.name != b.name || a.imports != b.imports || a.rules.size() != b.rules.size()
        || a.signature.size() != b.signature.size())
        return false;
    for (size_t i = 0; i < a.signature.size(); i++)
        if (print_decl(a.signature[i]) != print_decl(b.signature[i])) return false;
    for (size_t i = 0; i < a.rules.size(); i++)
        if (a.rules[i].label != b.rules[i].label || !rule_equal(a.rules[i], b.rules[i]))
            return false;
    return true;
}

// --- alpha equivalence ---

namespace {

struct AlphaCtx {
    std::map<std::string, std::string> fwd, bwd;

    bool var(const std::string & a, const std::string & b)
    {
        // Prefix kind must agree.
        char pa = a.empty() ? ' ' : a[0];
        char pb = b.empty() ? ' ' : b[0];
        bool la = pa == '*' || pa == '+';
        bool lb = pb == '*' || pb == '+';
        if (la != lb || (la && pa != pb)) return false;
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

    bool body(const BodyPtr & a, const BodyPtr & b)
    {
        if (!a || !b) return a == b;
        if (a->is_term() != b->is_term()) return false;
        if (a->is_term()) return expr(a->term, b->term);
        if (a->alts.size() != b->alts.size()) return false;
        for (size_t i = 0; i < a->alts.size(); i++) {
            if (a->alts[i].conds.size() != b->alts[i].conds.size()) return false;
            for (size_t j = 0; j < a->alts[i].conds.size(); j++)
                if (!cond(a->alts[i].conds[j], b->alts[i].conds[j])) return false;
            if (!body(a->alts[i].body, b->alts[i].body)) return false;
        }
        if ((a->else_body == nullptr) != (b->else_body == nullptr)) return false;
        return !a->else_body || body(a->else_body, b->else_body);
    }
};

} // namespace

bool rule_alpha_equal(const Rule & a, const Rule & b)
{
    if (a.is_default != b.is_default || a.conds.size() != b.conds.size()) return false;
    AlphaCtx ctx;
    if (!ctx.expr(a.lhs, b.lhs)) return false;
    for (size_t i = 0; i < a.conds.size(); i++)
        if (!ctx.cond(a.conds[i], b.conds[i])) return false;
    return ctx.body(a.rhs, b.rhs);
}

// --- traversal ---

void visit_vars(const ExprPtr & e, const std::function<void(const std::string &)> & fn)
{
    if (!e) return;
    if (e->kind == ExprKind::Var || e->kind == ExprKind::ListVar) {
        fn(e->name);
        return;
    }
    for (const ExprPtr & a : e->args) visit_vars(a, fn);
}

void collect_vars(const ExprPtr & e, std::vector<std::string> & out)
{
    visit_vars(e, [&](const std::string & n) { out.push_back(n); });
}

bool contains_var(const ExprPtr & e, const std::string & name)
{
    bool found = false;
    visit_vars(e, [&](const std::string & n) { found |= (n == name); });
    return found;
}

ExprPtr substitute_vars(const ExprPtr & e, const std::map<std::string, std::string> & renaming)
{
    if (!e) return e;
    if (e->kind == ExprKind::Var || e->kind == ExprKind::ListVar) {
        auto it = renaming.find(e->name);
        if (it == renaming.end()) return e;
        auto out = std::make_shared<Expr>(*e);
        out->name = it->second;
        return out;
    }
    if (e->args.empty()) return e;
    auto out = std::make_shared<Expr>(*e);
    for (ExprPtr & a : out->args) a = substitute_vars(a, renaming);
    return out;
}

// --- validation ---

namespace {

struct Validator {
    const Signature & sig;
    std::vector<Diagnostic> diags;

    void error(std::string msg, int line) { diags.push_back({Diagnostic::Error, std::move(msg), line}); }
    void warn(std::string msg, int line) { diags.push_back({Diagnostic::Warning, std::move(msg), line}); }

    void check_symbols(const ExprPtr & e, int line)
    {
        if (!e) return;
        if (e->kind == ExprKind::App) {
            uint32_t arity = static_cast<uint32_t>(e->args.size());
            if (!sig.find(e->name, arity) && !extended_builtin_arity(e->name))
                error("undeclared symbol '" + e->name + "' of arity " + std::to_string(arity), line);
        }
        for (const ExprPtr & a : e->args) check_symbols(a, line);
    }

    void check_symbols_body(const BodyPtr & b, int line)
    {
        if (b->is_term()) {
            check_symbols(b->term, line);
            return;
        }
        for (const Alternative & alt : b->alts) {
            for (const Condition & c : alt.conds) {
                check_symbols(c.lhs, line);
                check_symbols(c.rhs, line);
            }
            check_symbols_body(alt.body, line);
        }
        if (b->else_body) check_symbols_body(b->else_body, line);
    }

    std::set<std::string> vars_of(const ExprPtr & e)
    {
        std::set<std::string> out;
        visit_vars(e, [&](const std::string & n) { out.insert(n); });
        return out;
    }

    void check_conds(const std::vector<Condition> & conds, std::set<std::string> & bound,
                     const std::string & label, int line)
    {
        for (const Condition & c : conds) {
            std::set<std::string> lv = vars_of(c.lhs), rv = vars_of(c.rhs);
            std::set<std::string> newl, newr;
            for (auto & v : lv)
                if (!bound.count(v)) newl.insert(v);
            for (auto & v : rv)
                if (!bound.count(v)) newr.insert(v);
            switch (c.kind) {
            case CondKind::Negative:
                if (!newl.empty() || !newr.empty())
                    error("negative condition introduces new variable(s) in rule [" + label + "]", line);
                break;
            case CondKind::Positive:
                if (!newl.empty() && !newr.empty())
                    error("positive condition has new variables on both sides in rule [" + label + "]",
                          line);
                break;
            case CondKind::Assignment:
                if (!newr.empty())
                    error("assignment right-hand side has unbound variable(s) in rule [" + label + "]",
                          line);
                break;
            }
            bound.insert(newl.begin(), newl.end());
            bound.insert(newr.begin(), newr.end());
        }
    }

    void check_body(const BodyPtr & b, std::set<std::string> bound, const std::string & label,
                    int line)
    {
        if (b->is_term()) {
            for (auto & v : vars_of(b->term))
                if (!bound.count(v))
                    error("right-hand side variable '" + v + "' is unbound in rule [" + label + "]",
                          line);
            return;
        }
        for (const Alternative & alt : b->alts) {
            std::set<std::string> inner = bound;
            check_conds(alt.conds, inner, label, line);
            check_body(alt.body, inner, label, line);
        }
        if (b->else_body) check_body(b->else_body, bound, label, line);
    }

    void rule(const Rule & r)
    {
        if (r.lhs->kind != ExprKind::App) {
            error("rule [" + r.label + "] left-hand side must be a function application", r.line);
            return;
        }
        uint32_t arity = static_cast<uint32_t>(r.lhs->args.size());
        const SymbolDecl * d = sig.find(r.lhs->name, arity);
        if (!d)
            error("undeclared outermost symbol '" + r.lhs->name + "' of arity "
                      + std::to_string(arity) + " in rule [" + r.label + "]",
                  r.line);
        else if (d->is_constructor)
            error("constructor '" + r.lhs->name + "' occurs outermost in the left-hand side of rule ["
                      + r.label + "]",
                  r.line);
        check_symbols(r.lhs, r.line);
        for (const Condition & c : r.conds) {
            check_symbols(c.lhs, r.line);
            check_symbols(c.rhs, r.line);
        }
        check_symbols_body(r.rhs, r.line);

        std::set<std::string> bound = vars_of(r.lhs);
        check_conds(r.conds, bound, r.label, r.line);
        check_body(r.rhs, bound, r.label, r.line);
    }
};

} // namespace

std::vector<Diagnostic> validate(const ModuleDef & m, const Signature & visible)
{
    Validator v{visible, {}};
    std::set<std::string> labels;
    for (const Rule & r : m.rules) {
        if (!r.label.empty() && !labels.insert(r.label).second)
            v.warn("duplicate rule label [" + r.label + "]", r.line);
        v.rule(r);
    }
    return v.diags;
}

} // namespace rwc
