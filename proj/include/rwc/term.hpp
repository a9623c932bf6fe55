#ifndef RWC_TERM_HPP
#define RWC_TERM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rwc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceError : Error {
    using Error::Error;
};

/* Identity of a term node inside one TermStore.  Equality of Terms is
   identity equality; with sharing enabled this coincides with structural
   equality. */
struct Term {
    uint32_t id = UINT32_MAX;

    bool valid() const { return id != UINT32_MAX; }
    friend bool operator==(Term a, Term b) { return a.id == b.id; }
    friend bool operator!=(Term a, Term b) { return a.id != b.id; }
};

struct SymbolId {
    uint32_t index = UINT32_MAX;

    bool valid() const { return index != UINT32_MAX; }
    friend bool operator==(SymbolId a, SymbolId b) { return a.index == b.index; }
    friend bool operator!=(SymbolId a, SymbolId b) { return a.index != b.index; }
};

struct SymbolInfo {
    std::string name;
    uint32_t arity = 0;
    bool is_constructor = false;
    bool memo = false;
    std::vector<uint32_t> delay_positions;
};

enum class TermKind : uint8_t { Application, ListNode, EmptyList };

struct StoreStats {
    uint64_t unique_nodes = 0;         // live nodes, empty list excluded
    uint64_t construction_requests = 0;
    uint64_t interning_hits = 0;
    uint64_t table_capacity = 0;
    uint64_t peak_unique_nodes = 0;
    uint64_t double_unregister_warnings = 0;
};

using RootHandle = uint64_t;

/* Maximally-shared immutable term storage.  Every structurally distinct
   term exists exactly once (sharing on); term_equal is then a plain
   identity check.  With sharing off every construction allocates a fresh
   node and term_equal falls back to a structural walk. */
class TermStore {
public:
    explicit TermStore(bool sharing = true);

    bool sharing() const { return sharing_; }

    SymbolId intern_symbol(const std::string & name, uint32_t arity);
    SymbolId intern_symbol(const SymbolInfo & info);
    std::optional<SymbolId> find_symbol(const std::string & name, uint32_t arity) const;
    const SymbolInfo & symbol(SymbolId s) const;
    size_t symbol_count() const { return symbols_.size(); }

    Term make_app(SymbolId symbol, const std::vector<Term> & args);
    Term make_constant(const std::string & name);

    TermKind kind(Term t) const;
    SymbolId app_symbol(Term t) const;
    uint32_t app_arity(Term t) const;
    Term app_arg(Term t, uint32_t i) const;

    // List primitives.
    Term null() const { return Term{0}; }
    Term make_list(Term t);
    Term cons(Term head, Term tail);
    Term conc(Term l1, Term l2);
    Term list_head(Term l) const;
    Term list_tail(Term l) const;
    Term list_last(Term l) const;
    Term list_prefix(Term l);
    bool not_empty_list(Term l) const;
    bool is_single_element(Term l) const;
    bool is_list(Term t) const;
    uint32_t list_length(Term l) const;
    /* Elements from cursor p1 up to but excluding cursor p2; p2 must be a
       suffix of p1. */
    Term slice(Term p1, Term p2);
    std::vector<Term> list_elements(Term l) const;
    Term list_from(const std::vector<Term> & elems);

    bool term_equal(Term a, Term b) const;
    bool structural_equal(Term a, Term b) const;

    RootHandle register_root(Term t);
    void unregister_root(RootHandle h);
    /* Extra roots scanned during collect() (memo tables, constant caches). */
    uint64_t add_root_provider(std::function<void(std::vector<Term> &)> fn);
    void remove_root_provider(uint64_t id);

    uint64_t collect();

    bool live(Term t) const;
    const StoreStats & stats() const;
    void reset_peak();
    std::vector<Term> live_terms() const;

    void set_node_limit(uint64_t limit) { node_limit_ = limit; }

private:
    struct Node {
        TermKind kind;
        SymbolId sym;          // Application only
        std::vector<Term> args; // Application: args; ListNode: {head, tail}
        uint64_t hash = 0;
        bool live = false;
        bool mark = false;
    };

    Term intern(Node && n);
    uint64_t node_hash(const Node & n) const;
    bool node_matches(const Node & a, Term b) const;
    void check_live(Term t, const char * what) const;

    bool sharing_;
    std::vector<Node> nodes_;
    std::vector<uint32_t> free_;
    std::unordered_map<uint64_t, std::vector<Term>> table_;
    std::vector<SymbolInfo> symbols_;
    std::unordered_map<std::string, uint32_t> symbol_index_; // "name/arity"
    std::unordered_map<RootHandle, Term> roots_;
    std::unordered_map<uint64_t, std::function<void(std::vector<Term> &)>> root_providers_;
    RootHandle next_root_ = 1;
    uint64_t next_provider_ = 1;
    uint64_t node_limit_ = 0;
    mutable StoreStats stats_;
};

/* RAII root registration. */
class Rooted {
public:
    Rooted(TermStore & store, Term t) : store_(&store), handle_(store.register_root(t)) {}
    ~Rooted() { store_->unregister_root(handle_); }
    Rooted(const Rooted &) = delete;
    Rooted & operator=(const Rooted &) = delete;

private:
    TermStore * store_;
    RootHandle handle_;
};

} // namespace rwc

#endif
