#ifndef RWC_PLANNER_HPP
#define RWC_PLANNER_HPP

#include "rwc/plan.hpp"
#include "rwc/preprocess.hpp"

namespace rwc {

struct PlannerOptions {
    /* Pick the argument matching order by discriminating power instead of
       left-to-right. */
    bool reorder_args = false;
};

/* Most specific first (pattern subsumption), textual order for incomparable
   rules, defaults last.  Duplicate rules produce a warning. */
std::vector<Rule> order_rules(std::vector<Rule> rules,
                              std::vector<Diagnostic> * diags = nullptr);

RewritePlan compile_unit(const FunctionUnit & u, const Signature & sig,
                         const PlannerOptions & opts = {},
                         std::vector<Diagnostic> * diags = nullptr);

/* Resolves every Make target against the program's plan table and the
   signature; throws on unresolved symbols.  Run after plan_index is
   complete (used by link_program and when reassembling saved programs). */
void resolve_program(Program & prog, const Signature & sig,
                     std::vector<Diagnostic> * diags = nullptr);

/* Compiles every unit and resolves cross-references; independent of unit
   load order. */
Program link_program(const std::vector<FunctionUnit> & units, const Signature & sig,
                     const PlannerOptions & opts = {},
                     std::vector<Diagnostic> * diags = nullptr);

} // namespace rwc

#endif
