#include "rwc/term_io.hpp"

#include <cctype>

namespace rwc {

namespace {

bool name_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '\'';
}

struct Task {
    enum Kind { Emit, Text } kind;
    Term term;
    std::string text;
};

} // namespace

std::string print_term(const TermStore & store, Term t)
{
    std::string out;
    std::vector<Task> stack{{Task::Emit, t, {}}};
    while (!stack.empty()) {
        Task task = std::move(stack.back());
        stack.pop_back();
        if (task.kind == Task::Text) {
            out += task.text;
            continue;
        }
        Term cur = task.term;
        switch (store.kind(cur)) {
        case TermKind::EmptyList:
            out += "[]";
            break;
        case TermKind::ListNode: {
            out += "[";
            std::vector<Term> elems = store.list_elements(cur);
            stack.push_back({Task::Text, {}, "]"});
            for (size_t i = elems.size(); i-- > 0;) {
                stack.push_back({Task::Emit, elems[i], {}});
                if (i > 0) stack.push_back({Task::Text, {}, ","});
            }
            break;
        }
        case TermKind::Application: {
            const SymbolInfo & sym = store.symbol(store.app_symbol(cur));
            out += sym.name;
            if (sym.arity > 0) {
                out += "(";
                stack.push_back({Task::Text, {}, ")"});
                for (uint32_t i = sym.arity; i-- > 0;) {
                    stack.push_back({Task::Emit, store.app_arg(cur, i), {}});
                    if (i > 0) stack.push_back({Task::Text, {}, ","});
                }
            }
            break;
        }
        }
    }
    return out;
}

namespace {

struct TermParser {
    TermStore & store;
    const std::string & text;
    size_t pos = 0;

    void skip_ws()
    {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) pos++;
    }

    [[noreturn]] void fail(const std::string & msg)
    {
        throw Error("term syntax error at offset " + std::to_string(pos) + ": " + msg);
    }

    bool eat(char c)
    {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            pos++;
            return true;
        }
        return false;
    }

    std::string name()
    {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() && name_char(text[pos])) pos++;
        if (pos == start) fail("expected a name");
        return text.substr(start, pos - start);
    }

    Term term()
    {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        if (text[pos] == '[') {
            pos++;
            std::vector<Term> elems;
            if (!eat(']')) {
                do {
                    elems.push_back(term());
                } while (eat(','));
                if (!eat(']')) fail("expected ']'");
            }
            return store.list_from(elems);
        }
        std::string sym = name();
        std::vector<Term> args;
        if (eat('(')) {
            do {
                args.push_back(term());
            } while (eat(','));
            if (!eat(')')) fail("expected ')'");
        }
        return store.make_app(store.intern_symbol(sym, static_cast<uint32_t>(args.size())), args);
    }
};

} // namespace

Term parse_term(TermStore & store, const std::string & text)
{
    TermParser p{store, text};
    Term t = p.term();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return t;
}

} // namespace rwc
