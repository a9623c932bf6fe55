#ifndef RWC_AST_HPP
#define RWC_AST_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rwc/term.hpp"

namespace rwc {

/* Abstract syntax shared by patterns and term expressions.  Variables start
   with a capital; list variables carry a '*' (may be empty) or '+' (non-empty)
   prefix, which is kept as part of the name. */
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind : uint8_t { Var, ListVar, App, List, Conc, Null };

struct Expr {
    ExprKind kind;
    std::string name;          // Var, ListVar (with prefix), App
    std::vector<ExprPtr> args; // App, List (1), Conc (2)
    int line = 0, col = 0;
};

ExprPtr mk_var(std::string name);
ExprPtr mk_list_var(std::string name_with_prefix);
ExprPtr mk_app(std::string name, std::vector<ExprPtr> args = {});
ExprPtr mk_list1(ExprPtr e);
ExprPtr mk_conc(ExprPtr a, ExprPtr b);
ExprPtr mk_null();

inline bool is_list_expr(const Expr & e)
{
    return e.kind == ExprKind::List || e.kind == ExprKind::Conc || e.kind == ExprKind::Null
        || e.kind == ExprKind::ListVar;
}

enum class CondKind : uint8_t { Positive, Negative, Assignment };

struct Condition {
    CondKind kind;
    ExprPtr lhs; // Assignment: the pattern side
    ExprPtr rhs;
};

/* Rule body: either a term expression or a group of guarded alternatives
   with an optional trailing else (extended form only). */
struct Body;
using BodyPtr = std::shared_ptr<const Body>;

struct Alternative {
    std::vector<Condition> conds;
    BodyPtr body;
};

struct Body {
    ExprPtr term;                   // set iff this is a plain term body
    std::vector<Alternative> alts;  // set iff this is a group
    BodyPtr else_body;              // optional, groups only
    bool is_term() const { return term != nullptr; }
};

BodyPtr mk_term_body(ExprPtr e);
BodyPtr mk_group(std::vector<Alternative> alts, BodyPtr else_body = nullptr);

struct Rule {
    std::string label;
    bool is_default = false;
    std::vector<Condition> conds;
    ExprPtr lhs;
    BodyPtr rhs;
    int line = 0;
};

struct SymbolDecl {
    std::string name;
    uint32_t arity = 0;
    bool is_constructor = false;
    bool memo = false;
    std::vector<uint32_t> delay_positions;
    int line = 0;
};

struct ModuleDef {
    std::string name;
    std::vector<std::string> imports;
    std::vector<SymbolDecl> signature;
    std::vector<Rule> rules;
};

/* Union of the signatures visible from a module (declared plus imported). */
class Signature {
public:
    void add(const SymbolDecl & decl);
    const SymbolDecl * find(const std::string & name, uint32_t arity) const;
    bool is_constructor(const std::string & name, uint32_t arity) const;
    const std::map<std::string, SymbolDecl> & all() const { return decls_; }

private:
    std::map<std::string, SymbolDecl> decls_; // keyed "name/arity"
};

/* Predefined symbols of the extended (preprocessor output) language;
   arity keyed by name. */
std::optional<uint32_t> extended_builtin_arity(const std::string & name);

// --- printing ---

std::string print_expr(const Expr & e);
std::string print_condition(const Condition & c);
std::string print_rule(const Rule & r);
std::string print_module(const ModuleDef & m);

// --- structural equality and alpha-equivalence ---

bool expr_equal(const ExprPtr & a, const ExprPtr & b);
bool body_equal(const BodyPtr & a, const BodyPtr & b);
bool rule_equal(const Rule & a, const Rule & b);
bool module_equal(const ModuleDef & a, const ModuleDef & b);

/* Equality up to a bijective renaming of variables. */
bool rule_alpha_equal(const Rule & a, const Rule & b);

// --- traversal helpers ---

void visit_vars(const ExprPtr & e, const std::function<void(const std::string &)> & fn);
void collect_vars(const ExprPtr & e, std::vector<std::string> & out);
bool contains_var(const ExprPtr & e, const std::string & name);
ExprPtr substitute_vars(const ExprPtr & e, const std::map<std::string, std::string> & renaming);

struct Diagnostic {
    enum Level { Warning, Error } level;
    std::string message;
    int line = 0;
};

std::vector<Diagnostic> validate(const ModuleDef & m, const Signature & visible);

} // namespace rwc

#endif
