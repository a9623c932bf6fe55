#ifndef RWC_PROGRAM_IO_HPP
#define RWC_PROGRAM_IO_HPP

#include "rwc/plan.hpp"
#include "rwc/planner.hpp"
#include "rwc/postprocess.hpp"
#include "rwc/preprocess.hpp"

namespace rwc {

inline constexpr int kArtifactVersion = 1;

/* One compiled function with the fingerprint of the preprocessed unit it
   came from, so unchanged units can be reused on recompilation. */
struct CompiledUnit {
    std::string key; // "name/arity"
    std::string fingerprint;
    RewritePlan plan; // unresolved targets, no program-level optimizations
};

struct ProgramArtifact {
    int version = kArtifactVersion;
    bool reorder_args = false;
    Signature signature;
    std::vector<SymbolDecl> constructors;
    std::vector<CompiledUnit> units;
};

std::string unit_fingerprint(const FunctionUnit & preprocessed, const PlannerOptions & opts);

std::string artifact_to_json(const ProgramArtifact & a);
ProgramArtifact artifact_from_json(const std::string & text);

void save_artifact(const ProgramArtifact & a, const std::string & path);
ProgramArtifact load_artifact(const std::string & path); // throws on version mismatch

/* Sorted plan table, cross-reference resolution, and the program-level
   optimization passes. */
Program assemble_program(const ProgramArtifact & a, const PostprocessOptions & opts = {},
                         std::vector<Diagnostic> * diags = nullptr);

} // namespace rwc

#endif
