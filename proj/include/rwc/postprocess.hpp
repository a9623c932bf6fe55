#ifndef RWC_POSTPROCESS_HPP
#define RWC_POSTPROCESS_HPP

#include "rwc/plan.hpp"

namespace rwc {

struct PostprocessOptions {
    bool tail_recursion = true;
    bool const_cache = true;
};

/* Turns a returned self-application into a loop back-edge (TailCall), so
   tail-recursive functions run in constant native stack. */
void eliminate_tail_recursion(Program & p);

/* Hoists maximal ground subexpressions that involve at least one function
   call into Program::constants, deduplicated, so they are evaluated once
   per run. */
void cache_constants(Program & p);

void postprocess(Program & p, const PostprocessOptions & opts = {});

} // namespace rwc

#endif
