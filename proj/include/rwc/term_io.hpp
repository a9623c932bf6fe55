#ifndef RWC_TERM_IO_HPP
#define RWC_TERM_IO_HPP

#include <string>

#include "rwc/term.hpp"

namespace rwc {

/* Textual term syntax: f(t1,...,tn), constants as bare names,
   lists as [t1,...,tn]. */
std::string print_term(const TermStore & store, Term t);

/* Parses a ground term, interning symbols on the fly (arity inferred). */
Term parse_term(TermStore & store, const std::string & text);

} // namespace rwc

#endif
