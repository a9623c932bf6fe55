#ifndef RWC_PARSER_HPP
#define RWC_PARSER_HPP

#include <string>
#include <vector>

#include "rwc/ast.hpp"

namespace rwc {

struct ParseOptions {
    /* Accept the extended (preprocessor output) constructs: assignment
       conditions, nested rule groups, else. */
    bool allow_extended = false;
};

struct SyntaxError : Error {
    SyntaxError(const std::string & msg, int line, int col)
        : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg)
        , line(line)
        , col(col)
    {
    }
    int line, col;
};

ModuleDef parse_module(const std::string & text, const ParseOptions & opts = {});

/* Parses a single rule given in module rule syntax (test helper). */
Rule parse_rule(const std::string & text, const ParseOptions & opts = {});

/* Loads modules by name from a search path; one module per NAME.masf file. */
class ModuleLoader {
public:
    ModuleLoader(std::vector<std::string> search_path, ParseOptions opts = {})
        : search_path_(std::move(search_path)), opts_(opts)
    {
    }

    const ModuleDef & load(const std::string & name);
    const ModuleDef & load_file(const std::string & path);
    void add_module(ModuleDef m); // for in-memory modules (tests)

private:
    std::vector<std::string> search_path_;
    ParseOptions opts_;
    std::map<std::string, ModuleDef> cache_;
};

std::string read_file(const std::string & path);

} // namespace rwc

#endif
