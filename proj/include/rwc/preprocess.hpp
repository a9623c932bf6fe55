#ifndef RWC_PREPROCESS_HPP
#define RWC_PREPROCESS_HPP

#include <string>
#include <vector>

#include "rwc/ast.hpp"
#include "rwc/parser.hpp"

namespace rwc {

/* All rewrite rules for one function, collected across the import closure.
   Constructor symbols of a module are kept together in a single unit with
   no rules. */
struct FunctionUnit {
    std::string name;            // function name, or module name for constructor units
    uint32_t arity = 0;
    bool is_constructor_unit = false;
    std::vector<SymbolDecl> symbols; // one for functions, several for constructor units
    std::vector<Rule> rules;
    std::vector<std::string> origin_modules;

    const SymbolDecl & decl() const { return symbols.at(0); }
};

struct CollectResult {
    std::vector<FunctionUnit> units;
    Signature signature; // union over the import closure
    std::vector<std::string> module_order;
};

CollectResult collect_functions(const std::string & top_module, ModuleLoader & loader);

/* Per-rule transformation steps, in pipeline order. */
Rule linearize(const Rule & r, const Signature & sig);
Rule introduce_assignments(const Rule & r);
Rule eliminate_constructor_args(const Rule & r, const Signature & sig);
Rule simplify_assignment_patterns(const Rule & r);
Rule simplify_list_elements(const Rule & r, const Signature & sig);
Rule simplify_list_patterns(const Rule & r, const Signature & sig);

/* Per-unit transformation steps. */
FunctionUnit combine_rules(FunctionUnit u);
FunctionUnit introduce_else(FunctionUnit u);

/* The whole pipeline after collection. */
FunctionUnit preprocess_unit(const FunctionUnit & u, const Signature & sig);

/* Extended-language text of a preprocessed unit (for --emit-muasf-plus). */
std::string print_unit(const FunctionUnit & u);

} // namespace rwc

#endif
