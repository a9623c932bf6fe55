#include "rwc/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace rwc {

namespace {

enum class Tok {
    Name,     // identifier, possibly containing '-', '_', '\''
    ListVar,  // *Name or +Name (prefix kept)
    Int,
    LParen, RParen, LBrace, RBrace, LBracket, RBracket,
    Comma, Semi, Amp, Colon,
    Eq,       // =
    EqEq,     // ==
    Neq,      // !=
    Assign,   // :=
    Implies,  // ==>
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

bool name_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c));
}

bool name_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '\'';
}

std::vector<Token> lex(const std::string & text)
{
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto push = [&](Tok k, std::string s) { out.push_back({k, std::move(s), line, col}); };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            line++;
            col = 1;
            i++;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            i++;
            col++;
            continue;
        }
        if (c == '%') { // comment to end of line
            while (i < text.size() && text[i] != '\n') i++;
            continue;
        }
        int startcol = col;
        auto tok = [&](Tok k, size_t len) {
            out.push_back({k, text.substr(i, len), line, startcol});
            i += len;
            col += static_cast<int>(len);
        };
        if (name_start(c) || c == '_') {
            size_t j = i;
            while (j < text.size() && name_char(text[j])) j++;
            tok(Tok::Name, j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) j++;
            tok(Tok::Int, j - i);
            continue;
        }
        if ((c == '*' || c == '+') && i + 1 < text.size() && name_start(text[i + 1])) {
            size_t j = i + 1;
            while (j < text.size() && name_char(text[j])) j++;
            tok(Tok::ListVar, j - i);
            continue;
        }
        if (text.compare(i, 3, "==>") == 0) { tok(Tok::Implies, 3); continue; }
        if (text.compare(i, 2, "==") == 0) { tok(Tok::EqEq, 2); continue; }
        if (text.compare(i, 2, "!=") == 0) { tok(Tok::Neq, 2); continue; }
        if (text.compare(i, 2, ":=") == 0) { tok(Tok::Assign, 2); continue; }
        switch (c) {
        case '(': tok(Tok::LParen, 1); continue;
        case ')': tok(Tok::RParen, 1); continue;
        case '{': tok(Tok::LBrace, 1); continue;
        case '}': tok(Tok::RBrace, 1); continue;
        case '[': tok(Tok::LBracket, 1); continue;
        case ']': tok(Tok::RBracket, 1); continue;
        case ',': tok(Tok::Comma, 1); continue;
        case ';': tok(Tok::Semi, 1); continue;
        case '&': tok(Tok::Amp, 1); continue;
        case ':': tok(Tok::Colon, 1); continue;
        case '=': tok(Tok::Eq, 1); continue;
        default:
            throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
        }
        (void)push;
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

struct Parser {
    std::vector<Token> toks;
    size_t pos = 0;
    ParseOptions opts;

    const Token & peek(size_t ahead = 0) const { return toks[std::min(pos + ahead, toks.size() - 1)]; }

    Token next() { return toks[pos == toks.size() - 1 ? pos : pos++]; }

    [[noreturn]] void fail(const std::string & msg)
    {
        const Token & t = peek();
        throw SyntaxError(msg + " (got '" + (t.kind == Tok::End ? "<end>" : t.text) + "')", t.line,
                          t.col);
    }

    bool at_keyword(const std::string & kw) const
    {
        return peek().kind == Tok::Name && peek().text == kw;
    }

    void expect_keyword(const std::string & kw)
    {
        if (!at_keyword(kw)) fail("expected '" + kw + "'");
        pos++;
    }

    Token expect(Tok k, const std::string & what)
    {
        if (peek().kind != k) fail("expected " + what);
        return next();
    }

    bool eat(Tok k)
    {
        if (peek().kind == k) {
            pos++;
            return true;
        }
        return false;
    }

    ExprPtr expr()
    {
        const Token & t = peek();
        if (t.kind == Tok::ListVar) {
            next();
            auto e = mk_list_var(t.text);
            const_cast<Expr &>(*e).line = t.line;
            const_cast<Expr &>(*e).col = t.col;
            return e;
        }
        if (t.kind != Tok::Name) fail("expected a term");
        Token name = next();
        bool is_var = std::isupper(static_cast<unsigned char>(name.text[0]));
        if (name.text == "null") return mk_null();
        std::vector<ExprPtr> args;
        if (eat(Tok::LParen)) {
            if (is_var) throw SyntaxError("variables are first-order and cannot have arguments",
                                          name.line, name.col);
            if (!eat(Tok::RParen)) {
                do {
                    args.push_back(expr());
                } while (eat(Tok::Comma));
                expect(Tok::RParen, "')'");
            }
        }
        ExprPtr e;
        if (is_var) {
            e = mk_var(name.text);
        } else if (name.text == "list") {
            if (args.size() != 1) fail("'list' takes exactly one argument");
            e = mk_list1(args[0]);
        } else if (name.text == "conc") {
            if (args.size() != 2) fail("'conc' takes exactly two arguments");
            e = mk_conc(args[0], args[1]);
        } else {
            e = mk_app(name.text, std::move(args));
        }
        const_cast<Expr &>(*e).line = name.line;
        const_cast<Expr &>(*e).col = name.col;
        return e;
    }

    Condition condition_from(ExprPtr first)
    {
        Tok k = peek().kind;
        if (k == Tok::EqEq) {
            next();
            return {CondKind::Positive, first, expr()};
        }
        if (k == Tok::Neq) {
            next();
            return {CondKind::Negative, first, expr()};
        }
        if (k == Tok::Assign) {
            if (!opts.allow_extended) fail("assignment conditions require the extended language");
            next();
            return {CondKind::Assignment, first, expr()};
        }
        fail("expected '==', '!=' or ':=' in condition");
    }

    /* [conds ==>] -- returns the conditions; leaves the cursor at the
       conclusion. */
    std::vector<Condition> leading_conditions(ExprPtr & first_expr_out)
    {
        std::vector<Condition> conds;
        if (at_keyword("default") && peek(1).kind == Tok::Colon) {
            first_expr_out = nullptr;
            return conds;
        }
        ExprPtr first = expr();
        Tok k = peek().kind;
        if (k != Tok::EqEq && k != Tok::Neq && k != Tok::Assign) {
            first_expr_out = first; // no conditions; this was the conclusion
            return conds;
        }
        conds.push_back(condition_from(first));
        while (eat(Tok::Amp)) {
            ExprPtr e = expr();
            conds.push_back(condition_from(e));
        }
        expect(Tok::Implies, "'==>'");
        first_expr_out = nullptr;
        return conds;
    }

    BodyPtr body()
    {
        if (peek().kind == Tok::LBrace) {
            if (!opts.allow_extended) fail("nested rule bodies require the extended language");
            next();
            std::vector<Alternative> alts;
            BodyPtr else_body;
            while (true) {
                alts.push_back(alternative());
                if (eat(Tok::Semi)) continue;
                if (at_keyword("else")) {
                    next();
                    else_body = else_content();
                }
                break;
            }
            expect(Tok::RBrace, "'}'");
            return mk_group(std::move(alts), std::move(else_body));
        }
        return mk_term_body(expr());
    }

    Alternative alternative()
    {
        if (peek().kind == Tok::LBrace) return {{}, body()};
        ExprPtr first;
        std::vector<Condition> conds = leading_conditions(first);
        if (first) return {std::move(conds), mk_term_body(first)};
        return {std::move(conds), body()};
    }

    BodyPtr else_content()
    {
        Alternative alt = alternative();
        if (alt.conds.empty()) return alt.body;
        return mk_group({std::move(alt)});
    }

    Rule rule()
    {
        Rule r;
        r.line = peek().line;
        if (eat(Tok::LBracket)) {
            std::string label;
            while (peek().kind != Tok::RBracket) {
                if (peek().kind == Tok::End) fail("unterminated rule label");
                label += next().text;
            }
            next();
            r.label = label;
        }
        ExprPtr first;
        r.conds = leading_conditions(first);
        if (at_keyword("default") && peek(1).kind == Tok::Colon) {
            pos += 2;
            r.is_default = true;
            first = nullptr;
        }
        r.lhs = first ? first : expr();
        expect(Tok::Eq, "'=' in rule conclusion");
        r.rhs = body();
        return r;
    }

    SymbolDecl decl()
    {
        SymbolDecl d;
        Token name = expect(Tok::Name, "symbol name");
        d.name = name.text;
        d.line = name.line;
        if (eat(Tok::LParen)) {
            do {
                Token us = expect(Tok::Name, "'_' placeholder");
                if (us.text != "_") fail("expected '_' placeholder");
                d.arity++;
            } while (eat(Tok::Comma));
            expect(Tok::RParen, "')'");
        }
        if (eat(Tok::LBrace)) {
            do {
                Token attr = expect(Tok::Name, "attribute");
                if (attr.text == "constructor") {
                    d.is_constructor = true;
                } else if (attr.text == "memo") {
                    d.memo = true;
                } else if (attr.text == "delay") {
                    expect(Tok::LParen, "'('");
                    do {
                        Token n = expect(Tok::Int, "argument position");
                        uint32_t p = static_cast<uint32_t>(std::stoul(n.text));
                        if (p >= d.arity)
                            throw SyntaxError("delay position out of range for '" + d.name + "'",
                                              n.line, n.col);
                        d.delay_positions.push_back(p);
                    } while (eat(Tok::Comma));
                    expect(Tok::RParen, "')'");
                } else {
                    fail("unknown attribute '" + attr.text + "'");
                }
            } while (eat(Tok::Comma));
            expect(Tok::RBrace, "'}'");
        }
        return d;
    }

    ModuleDef module()
    {
        ModuleDef m;
        expect_keyword("module");
        m.name = expect(Tok::Name, "module name").text;
        if (at_keyword("imports")) {
            next();
            do {
                m.imports.push_back(expect(Tok::Name, "module name").text);
            } while (eat(Tok::Comma));
            eat(Tok::Semi);
        }
        if (at_keyword("signature")) {
            next();
            while (!at_keyword("rules") && peek().kind != Tok::End) {
                m.signature.push_back(decl());
                if (!eat(Tok::Semi)) break;
            }
        }
        if (at_keyword("rules")) {
            next();
            while (peek().kind != Tok::End) {
                m.rules.push_back(rule());
                if (!eat(Tok::Semi)) break;
            }
        }
        expect(Tok::End, "end of module");
        return m;
    }
};

} // namespace

ModuleDef parse_module(const std::string & text, const ParseOptions & opts)
{
    Parser p{lex(text), 0, opts};
    return p.module();
}

Rule parse_rule(const std::string & text, const ParseOptions & opts)
{
    Parser p{lex(text), 0, opts};
    Rule r = p.rule();
    p.expect(Tok::End, "end of rule");
    return r;
}

std::string read_file(const std::string & path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const ModuleDef & ModuleLoader::load(const std::string & name)
{
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    for (const std::string & dir : search_path_) {
        std::string path = dir + "/" + name + ".masf";
        std::ifstream probe(path);
        if (!probe) continue;
        probe.close();
        ModuleDef m = parse_module(read_file(path), opts_);
        if (m.name != name)
            throw Error("module file " + path + " declares module '" + m.name + "'");
        return cache_.emplace(name, std::move(m)).first->second;
    }
    throw Error("cannot resolve module '" + name + "' on the search path");
}

const ModuleDef & ModuleLoader::load_file(const std::string & path)
{
    ModuleDef m = parse_module(read_file(path), opts_);
    return cache_.emplace(m.name, std::move(m)).first->second;
}

void ModuleLoader::add_module(ModuleDef m)
{
    std::string name = m.name;
    cache_[name] = std::move(m);
}

} // namespace rwc
