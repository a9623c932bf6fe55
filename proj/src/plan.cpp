#include "rwc/plan.hpp"

namespace rwc {

EvalPtr mk_slot(uint32_t slot)
{
    auto e = std::make_shared<EvalExpr>();
    e->kind = EvalExpr::K::Slot;
    e->slot = slot;
    return e;
}

EvalPtr mk_const_ref(uint32_t index)
{
    auto e = std::make_shared<EvalExpr>();
    e->kind = EvalExpr::K::Const;
    e->const_index = index;
    return e;
}

NodePtr mk_node(NodeKind k)
{
    auto n = std::make_shared<PlanNode>();
    n->kind = k;
    return n;
}

std::string print_eval(const EvalExpr & e)
{
    switch (e.kind) {
    case EvalExpr::K::Slot:
        return "s" + std::to_string(e.slot);
    case EvalExpr::K::Const:
        return "(const " + std::to_string(e.const_index) + ")";
    case EvalExpr::K::Make: {
        std::string out = e.quoted ? "(build " : "(make ";
        out += e.sym + "/" + std::to_string(e.arity);
        for (const EvalPtr & a : e.args) out += " " + print_eval(*a);
        return out + ")";
    }
    case EvalExpr::K::MakeList: {
        std::string out = "(mklist";
        for (const EvalExpr::Item & it : e.items)
            out += (it.splice ? " @" : " ") + print_eval(*it.e);
        return out + ")";
    }
    }
    return "?";
}

namespace {

void print_node(const NodePtr & n, std::string & out, int depth)
{
    std::string pad(static_cast<size_t>(depth) * 2, ' ');
    if (!n) {
        out += pad + "(fail)\n";
        return;
    }
    switch (n->kind) {
    case NodeKind::Alt: {
        out += pad + "(alt\n";
        for (const NodePtr & c : n->children) print_node(c, out, depth + 1);
        if (n->else_child) {
            out += pad + " else\n";
            print_node(n->else_child, out, depth + 1);
        }
        out += pad + ")\n";
        return;
    }
    case NodeKind::CheckSym:
        out += pad + "(check-sym s" + std::to_string(n->slot_a) + " " + n->sym + "/"
            + std::to_string(n->arity) + ")\n";
        break;
    case NodeKind::CheckEqual:
        out += pad + (n->negate ? "(check-neq s" : "(check-eq s") + std::to_string(n->slot_a)
            + " s" + std::to_string(n->slot_b) + ")\n";
        break;
    case NodeKind::Guard: {
        const char * g = n->guard == GuardKind::NonEmpty ? "non-empty"
            : n->guard == GuardKind::Empty               ? "empty"
                                                         : "single";
        out += pad + "(guard-" + g + " s" + std::to_string(n->slot_a) + ")\n";
        break;
    }
    case NodeKind::BindArg:
        out += pad + "(bind-arg s" + std::to_string(n->slot_b) + " s"
            + std::to_string(n->slot_a) + "." + std::to_string(n->index) + ")\n";
        break;
    case NodeKind::Head:
        out += pad + "(head s" + std::to_string(n->slot_b) + " s" + std::to_string(n->slot_a)
            + ")\n";
        break;
    case NodeKind::Tail:
        out += pad + "(tail s" + std::to_string(n->slot_b) + " s" + std::to_string(n->slot_a)
            + ")\n";
        break;
    case NodeKind::Last:
        out += pad + "(last s" + std::to_string(n->slot_b) + " s" + std::to_string(n->slot_a)
            + ")\n";
        break;
    case NodeKind::Prefix:
        out += pad + "(prefix s" + std::to_string(n->slot_b) + " s" + std::to_string(n->slot_a)
            + ")\n";
        break;
    case NodeKind::ListSplit: {
        out += pad + "(split s" + std::to_string(n->slot_a) + " -> s"
            + std::to_string(n->slot_b) + " s" + std::to_string(n->slot_c)
            + (n->min_len ? " min " + std::to_string(n->min_len) : "") + "\n";
        print_node(n->children.empty() ? nullptr : n->children[0], out, depth + 1);
        out += pad + ")\n";
        return;
    }
    case NodeKind::Eval:
        out += pad + "(eval s" + std::to_string(n->slot_a) + " " + print_eval(*n->expr) + ")\n";
        break;
    case NodeKind::Return:
        out += pad + "(return " + print_eval(*n->expr) + ")\n";
        return;
    case NodeKind::Fallthrough:
        out += pad + "(fallthrough)\n";
        return;
    case NodeKind::TailCall: {
        out += pad + "(loop";
        for (const EvalPtr & a : n->call_args) out += " " + print_eval(*a);
        out += ")\n";
        return;
    }
    }
    print_node(n->then, out, depth);
}

} // namespace

std::string print_plan(const RewritePlan & p)
{
    std::string out = "(plan " + p.name + "/" + std::to_string(p.arity) + " frame "
        + std::to_string(p.frame_size);
    if (p.memo) out += " memo";
    if (p.has_loop) out += " loop";
    if (!p.delay_positions.empty()) {
        out += " delay(";
        for (size_t i = 0; i < p.delay_positions.size(); i++)
            out += (i ? "," : "") + std::to_string(p.delay_positions[i]);
        out += ")";
    }
    out += "\n";
    print_node(p.root, out, 1);
    return out + ")\n";
}

std::string print_program(const Program & p)
{
    std::string out;
    for (size_t i = 0; i < p.constants.size(); i++)
        out += "(const " + std::to_string(i) + " " + print_expr(*p.constants[i]) + ")\n";
    for (const RewritePlan & pl : p.plans) out += print_plan(pl);
    return out;
}

} // namespace rwc
