#ifndef RWC_ORACLE_HPP
#define RWC_ORACLE_HPP

#include <map>
#include <string>
#include <vector>

#include "rwc/ast.hpp"
#include "rwc/preprocess.hpp"
#include "rwc/term.hpp"

namespace rwc {

/* A single way a pattern matches a subject: term variables map to terms,
   list variables to element sequences. */
struct Binding {
    std::map<std::string, Term> vars;
    std::map<std::string, std::vector<Term>> lists;
};

/* Every match of `pattern` against `subject` extending `seed`, in
   enumeration order: list splits are tried leftmost and shortest first. */
std::vector<Binding> oracle_match(TermStore & store, const ExprPtr & pattern, Term subject,
                                  const Binding & seed = {});

Term oracle_instantiate(TermStore & store, const ExprPtr & e, const Binding & b);

/* Reference interpreter: leftmost-innermost rewriting directly over the
   collected (untransformed) rules, with full backtracking over list splits
   and conditions.  Rules are tried most specific first, then in textual
   order; defaults last. */
class Oracle {
public:
    Oracle(TermStore & store, const CollectResult & program,
           uint64_t step_limit = 10'000'000);

    Term normalize(Term t);
    /* True if any subterm can still be rewritten. */
    bool has_redex(Term t);
    uint64_t steps() const { return steps_; }

private:
    std::optional<Term> rewrite_root(Term t);
    std::optional<Binding> solve(const std::vector<Condition> & conds, size_t i, Binding b);
    bool is_ground(const ExprPtr & e, const Binding & b) const;

    TermStore & store_;
    std::map<std::string, std::vector<Rule>> rules_; // keyed "name/arity"
    std::unordered_map<uint32_t, Term> cache_;
    uint64_t step_limit_;
    uint64_t steps_ = 0;
};

/* Exposed for ordering tests: most specific first, textual order for
   incomparable rules, defaults last. */
std::vector<Rule> oracle_order(std::vector<Rule> rules);

} // namespace rwc

#endif
