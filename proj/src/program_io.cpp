#include "rwc/program_io.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace rwc {

using nlohmann::json;

std::string unit_fingerprint(const FunctionUnit & preprocessed, const PlannerOptions & opts)
{
    std::string text = print_unit(preprocessed);
    if (opts.reorder_args) text += "\n%reorder-args";
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) h = (h ^ ch) * 1099511628211ull;
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json decl_to_json(const SymbolDecl & d)
{
    json j{{"name", d.name}, {"arity", d.arity}};
    if (d.is_constructor) j["constructor"] = true;
    if (d.memo) j["memo"] = true;
    if (!d.delay_positions.empty()) j["delay"] = d.delay_positions;
    return j;
}

SymbolDecl decl_from_json(const json & j)
{
    SymbolDecl d;
    d.name = j.at("name").get<std::string>();
    d.arity = j.at("arity").get<uint32_t>();
    d.is_constructor = j.value("constructor", false);
    d.memo = j.value("memo", false);
    if (j.contains("delay")) d.delay_positions = j["delay"].get<std::vector<uint32_t>>();
    return d;
}

json eval_to_json(const EvalPtr & e);

json eval_to_json_inner(const EvalExpr & e)
{
    switch (e.kind) {
    case EvalExpr::K::Slot:
        return json{{"k", "slot"}, {"s", e.slot}};
    case EvalExpr::K::Const:
        return json{{"k", "const"}, {"i", e.const_index}};
    case EvalExpr::K::Make: {
        json j{{"k", "make"}, {"sym", e.sym}, {"arity", e.arity}};
        if (e.quoted) j["quoted"] = true;
        json args = json::array();
        for (const EvalPtr & a : e.args) args.push_back(eval_to_json(a));
        j["args"] = std::move(args);
        return j;
    }
    case EvalExpr::K::MakeList: {
        json items = json::array();
        for (const EvalExpr::Item & it : e.items)
            items.push_back(json{{"splice", it.splice}, {"e", eval_to_json(it.e)}});
        return json{{"k", "list"}, {"items", std::move(items)}};
    }
    }
    throw Error("bad eval expression");
}

json eval_to_json(const EvalPtr & e) { return eval_to_json_inner(*e); }

EvalPtr eval_from_json(const json & j)
{
    auto e = std::make_shared<EvalExpr>();
    std::string k = j.at("k").get<std::string>();
    if (k == "slot") {
        e->kind = EvalExpr::K::Slot;
        e->slot = j.at("s").get<uint32_t>();
    } else if (k == "const") {
        e->kind = EvalExpr::K::Const;
        e->const_index = j.at("i").get<uint32_t>();
    } else if (k == "make") {
        e->kind = EvalExpr::K::Make;
        e->sym = j.at("sym").get<std::string>();
        e->arity = j.at("arity").get<uint32_t>();
        e->quoted = j.value("quoted", false);
        for (const json & a : j.at("args")) e->args.push_back(eval_from_json(a));
    } else if (k == "list") {
        e->kind = EvalExpr::K::MakeList;
        for (const json & it : j.at("items"))
            e->items.push_back({it.at("splice").get<bool>(), eval_from_json(it.at("e"))});
    } else {
        throw Error("bad plan file: unknown expression kind " + k);
    }
    return e;
}

const char * guard_name(GuardKind g)
{
    switch (g) {
    case GuardKind::NonEmpty: return "non-empty";
    case GuardKind::Empty: return "empty";
    case GuardKind::Single: return "single";
    }
    return "?";
}

GuardKind guard_from_name(const std::string & s)
{
    if (s == "non-empty") return GuardKind::NonEmpty;
    if (s == "empty") return GuardKind::Empty;
    if (s == "single") return GuardKind::Single;
    throw Error("bad plan file: unknown guard " + s);
}

json node_to_json(const NodePtr & n)
{
    if (!n) return nullptr;
    json j;
    switch (n->kind) {
    case NodeKind::Alt: {
        j["k"] = "alt";
        json children = json::array();
        for (const NodePtr & c : n->children) children.push_back(node_to_json(c));
        j["children"] = std::move(children);
        if (n->else_child) j["else"] = node_to_json(n->else_child);
        break;
    }
    case NodeKind::CheckSym:
        j = {{"k", "checksym"}, {"a", n->slot_a}, {"sym", n->sym}, {"arity", n->arity}};
        break;
    case NodeKind::CheckEqual:
        j = {{"k", "eq"}, {"a", n->slot_a}, {"b", n->slot_b}};
        if (n->negate) j["neg"] = true;
        break;
    case NodeKind::Guard:
        j = {{"k", "guard"}, {"a", n->slot_a}, {"g", guard_name(n->guard)}};
        break;
    case NodeKind::BindArg:
        j = {{"k", "bind"}, {"a", n->slot_a}, {"b", n->slot_b}, {"i", n->index}};
        break;
    case NodeKind::Head:
        j = {{"k", "head"}, {"a", n->slot_a}, {"b", n->slot_b}};
        break;
    case NodeKind::Tail:
        j = {{"k", "tail"}, {"a", n->slot_a}, {"b", n->slot_b}};
        break;
    case NodeKind::Last:
        j = {{"k", "last"}, {"a", n->slot_a}, {"b", n->slot_b}};
        break;
    case NodeKind::Prefix:
        j = {{"k", "prefix"}, {"a", n->slot_a}, {"b", n->slot_b}};
        break;
    case NodeKind::ListSplit:
        j = {{"k", "split"},
             {"a", n->slot_a},
             {"b", n->slot_b},
             {"c", n->slot_c},
             {"min", n->min_len},
             {"body", node_to_json(n->children.empty() ? nullptr : n->children[0])}};
        break;
    case NodeKind::Eval:
        j = {{"k", "eval"}, {"a", n->slot_a}, {"e", eval_to_json(n->expr)}};
        break;
    case NodeKind::Return:
        j = {{"k", "return"}, {"e", eval_to_json(n->expr)}};
        break;
    case NodeKind::Fallthrough:
        j = {{"k", "fallthrough"}};
        break;
    case NodeKind::TailCall: {
        j["k"] = "loop";
        json args = json::array();
        for (const EvalPtr & a : n->call_args) args.push_back(eval_to_json(a));
        j["args"] = std::move(args);
        break;
    }
    }
    if (n->then) j["then"] = node_to_json(n->then);
    return j;
}

NodePtr node_from_json(const json & j)
{
    if (j.is_null()) return nullptr;
    std::string k = j.at("k").get<std::string>();
    NodePtr n;
    if (k == "alt") {
        n = mk_node(NodeKind::Alt);
        for (const json & c : j.at("children")) n->children.push_back(node_from_json(c));
        if (j.contains("else")) n->else_child = node_from_json(j["else"]);
    } else if (k == "checksym") {
        n = mk_node(NodeKind::CheckSym);
        n->slot_a = j.at("a").get<uint32_t>();
        n->sym = j.at("sym").get<std::string>();
        n->arity = j.at("arity").get<uint32_t>();
    } else if (k == "eq") {
        n = mk_node(NodeKind::CheckEqual);
        n->slot_a = j.at("a").get<uint32_t>();
        n->slot_b = j.at("b").get<uint32_t>();
        n->negate = j.value("neg", false);
    } else if (k == "guard") {
        n = mk_node(NodeKind::Guard);
        n->slot_a = j.at("a").get<uint32_t>();
        n->guard = guard_from_name(j.at("g").get<std::string>());
    } else if (k == "bind") {
        n = mk_node(NodeKind::BindArg);
        n->slot_a = j.at("a").get<uint32_t>();
        n->slot_b = j.at("b").get<uint32_t>();
        n->index = j.at("i").get<uint32_t>();
    } else if (k == "head" || k == "tail" || k == "last" || k == "prefix") {
        n = mk_node(k == "head"       ? NodeKind::Head
                        : k == "tail" ? NodeKind::Tail
                        : k == "last" ? NodeKind::Last
                                      : NodeKind::Prefix);
        n->slot_a = j.at("a").get<uint32_t>();
        n->slot_b = j.at("b").get<uint32_t>();
    } else if (k == "split") {
        n = mk_node(NodeKind::ListSplit);
        n->slot_a = j.at("a").get<uint32_t>();
        n->slot_b = j.at("b").get<uint32_t>();
        n->slot_c = j.at("c").get<uint32_t>();
        n->min_len = j.at("min").get<uint32_t>();
        n->children.push_back(node_from_json(j.at("body")));
    } else if (k == "eval") {
        n = mk_node(NodeKind::Eval);
        n->slot_a = j.at("a").get<uint32_t>();
        n->expr = eval_from_json(j.at("e"));
    } else if (k == "return") {
        n = mk_node(NodeKind::Return);
        n->expr = eval_from_json(j.at("e"));
    } else if (k == "fallthrough") {
        n = mk_node(NodeKind::Fallthrough);
    } else if (k == "loop") {
        n = mk_node(NodeKind::TailCall);
        for (const json & a : j.at("args")) n->call_args.push_back(eval_from_json(a));
    } else {
        throw Error("bad plan file: unknown node kind " + k);
    }
    if (j.contains("then")) n->then = node_from_json(j["then"]);
    return n;
}

json plan_to_json(const RewritePlan & p)
{
    json j{{"name", p.name}, {"arity", p.arity}, {"frame", p.frame_size}};
    if (p.memo) j["memo"] = true;
    if (!p.delay_positions.empty()) j["delay"] = p.delay_positions;
    if (!p.rule_labels.empty()) j["labels"] = p.rule_labels;
    j["root"] = node_to_json(p.root);
    return j;
}

RewritePlan plan_from_json(const json & j)
{
    RewritePlan p;
    p.name = j.at("name").get<std::string>();
    p.arity = j.at("arity").get<uint32_t>();
    p.frame_size = j.at("frame").get<uint32_t>();
    p.memo = j.value("memo", false);
    if (j.contains("delay")) p.delay_positions = j["delay"].get<std::vector<uint32_t>>();
    if (j.contains("labels")) p.rule_labels = j["labels"].get<std::vector<std::string>>();
    p.root = node_from_json(j.at("root"));
    return p;
}

} // namespace

std::string artifact_to_json(const ProgramArtifact & a)
{
    json j;
    j["format"] = "rwc-program";
    j["version"] = a.version;
    j["reorder_args"] = a.reorder_args;
    json sig = json::array();
    for (const auto & [key, decl] : a.signature.all()) sig.push_back(decl_to_json(decl));
    j["signature"] = std::move(sig);
    json ctors = json::array();
    for (const SymbolDecl & d : a.constructors) ctors.push_back(decl_to_json(d));
    j["constructors"] = std::move(ctors);
    json units = json::array();
    for (const CompiledUnit & u : a.units)
        units.push_back(json{{"key", u.key},
                             {"fingerprint", u.fingerprint},
                             {"plan", plan_to_json(u.plan)}});
    j["units"] = std::move(units);
    return j.dump(1);
}

ProgramArtifact artifact_from_json(const std::string & text)
{
    json j = json::parse(text);
    if (j.value("format", "") != "rwc-program")
        throw Error("not a compiled program file");
    ProgramArtifact a;
    a.version = j.at("version").get<int>();
    if (a.version != kArtifactVersion)
        throw Error("unsupported program file version " + std::to_string(a.version)
                    + " (expected " + std::to_string(kArtifactVersion) + ")");
    a.reorder_args = j.value("reorder_args", false);
    for (const json & d : j.at("signature")) a.signature.add(decl_from_json(d));
    for (const json & d : j.at("constructors")) a.constructors.push_back(decl_from_json(d));
    for (const json & u : j.at("units")) {
        CompiledUnit cu;
        cu.key = u.at("key").get<std::string>();
        cu.fingerprint = u.at("fingerprint").get<std::string>();
        cu.plan = plan_from_json(u.at("plan"));
        a.units.push_back(std::move(cu));
    }
    return a;
}

void save_artifact(const ProgramArtifact & a, const std::string & path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << artifact_to_json(a) << "\n";
    if (!out) throw Error("write failed: " + path);
}

ProgramArtifact load_artifact(const std::string & path)
{
    return artifact_from_json(read_file(path));
}

Program assemble_program(const ProgramArtifact & a, const PostprocessOptions & opts,
                         std::vector<Diagnostic> * diags)
{
    Program prog;
    prog.signature = a.signature;
    prog.constructors = a.constructors;
    std::vector<const CompiledUnit *> units;
    for (const CompiledUnit & u : a.units) units.push_back(&u);
    std::sort(units.begin(), units.end(), [](const CompiledUnit * x, const CompiledUnit * y) {
        return std::tie(x->plan.name, x->plan.arity) < std::tie(y->plan.name, y->plan.arity);
    });
    for (const CompiledUnit * u : units) {
        prog.plan_index[u->plan.name + "/" + std::to_string(u->plan.arity)] =
            prog.plans.size();
        /* Deep copy: the program-level passes mutate plans in place, and the
           artifact may be assembled more than once with different options. */
        prog.plans.push_back(plan_from_json(plan_to_json(u->plan)));
    }
    resolve_program(prog, prog.signature, diags);
    postprocess(prog, opts);
    return prog;
}

} // namespace rwc
