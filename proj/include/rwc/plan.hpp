#ifndef RWC_PLAN_HPP
#define RWC_PLAN_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rwc/ast.hpp"

namespace rwc {

/* Term construction / evaluation expression inside a plan.  Slots refer to
   the current frame; Make either calls a compiled function or builds a
   constructor application (resolved at link time). */
struct EvalExpr;
using EvalPtr = std::shared_ptr<EvalExpr>;

struct EvalExpr {
    enum class K : uint8_t { Slot, Const, Make, MakeList };

    K kind = K::Slot;
    uint32_t slot = 0;        // Slot
    uint32_t const_index = 0; // Const: index into Program::constants
    std::string sym;          // Make
    uint32_t arity = 0;       // Make
    bool quoted = false;      // Make: build the application without calling
    int32_t target = -1;      // Make: plan index, -1 constructor, -2 builtin
    std::vector<EvalPtr> args;

    struct Item {
        bool splice = false; // append the elements of a list value
        EvalPtr e;
    };
    std::vector<Item> items; // MakeList
};

EvalPtr mk_slot(uint32_t slot);
EvalPtr mk_const_ref(uint32_t index);

enum class NodeKind : uint8_t {
    Alt,         // try children in order; else_child if all fail
    CheckSym,    // slot_a holds an application of sym/arity
    CheckEqual,  // slot_a ==/!= slot_b
    Guard,       // list test on slot_a
    BindArg,     // slot_b = argument `index` of slot_a
    Head,        // slot_b = first element of slot_a
    Tail,        // slot_b = slot_a without its first element (shared suffix)
    Last,        // slot_b = last element of slot_a
    Prefix,      // slot_b = slot_a without its last element
    ListSplit,   // enumerate slot_a = slot_b ++ slot_c, shortest slot_b first
    Eval,        // slot_a = value of expr
    Return,      // plan result = value of expr
    Fallthrough, // plan result = the function applied to its (normalized) args
    TailCall     // restart the plan with arguments call_args (loop back-edge)
};

enum class GuardKind : uint8_t { NonEmpty, Empty, Single };

struct PlanNode;
using NodePtr = std::shared_ptr<PlanNode>;

struct PlanNode {
    NodeKind kind;
    uint32_t slot_a = 0, slot_b = 0, slot_c = 0;
    uint32_t index = 0; // BindArg
    std::string sym;    // CheckSym
    uint32_t arity = 0; // CheckSym
    GuardKind guard = GuardKind::NonEmpty;
    bool negate = false;   // CheckEqual
    uint32_t min_len = 0;  // ListSplit: minimum prefix length
    EvalPtr expr;          // Eval, Return
    std::vector<EvalPtr> call_args; // TailCall
    NodePtr then;
    std::vector<NodePtr> children; // Alt alternatives; ListSplit body in [0]
    NodePtr else_child;            // Alt
};

NodePtr mk_node(NodeKind k);

struct RewritePlan {
    std::string name;
    uint32_t arity = 0;
    uint32_t frame_size = 0;
    bool memo = false;
    std::vector<uint32_t> delay_positions;
    NodePtr root;
    bool has_loop = false; // a TailCall exists
    std::vector<std::string> rule_labels;
};

struct Program {
    Signature signature;
    std::vector<SymbolDecl> constructors;
    std::vector<RewritePlan> plans;            // sorted by name/arity
    std::map<std::string, size_t> plan_index;  // "name/arity" -> plans index
    std::vector<ExprPtr> constants;            // ground expressions, deduplicated
};

/* Deterministic s-expression renderings (--emit-plan). */
std::string print_eval(const EvalExpr & e);
std::string print_plan(const RewritePlan & p);
std::string print_program(const Program & p);

} // namespace rwc

#endif
