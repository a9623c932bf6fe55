#include "rwc/term.hpp"

#include <algorithm>
#include <cassert>

namespace rwc {

static uint64_t mix(uint64_t h, uint64_t v)
{
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4);
    return h;
}

TermStore::TermStore(bool sharing) : sharing_(sharing)
{
    Node nil;
    nil.kind = TermKind::EmptyList;
    nil.live = true;
    nodes_.push_back(std::move(nil));
}

SymbolId TermStore::intern_symbol(const std::string & name, uint32_t arity)
{
    SymbolInfo info;
    info.name = name;
    info.arity = arity;
    return intern_symbol(info);
}

SymbolId TermStore::intern_symbol(const SymbolInfo & info)
{
    std::string key = info.name + "/" + std::to_string(info.arity);
    auto it = symbol_index_.find(key);
    if (it != symbol_index_.end()) {
        // Unique per (name, arity); later declarations may add attributes.
        SymbolInfo & existing = symbols_[it->second];
        existing.is_constructor |= info.is_constructor;
        existing.memo |= info.memo;
        for (uint32_t p : info.delay_positions)
            if (std::find(existing.delay_positions.begin(), existing.delay_positions.end(), p)
                == existing.delay_positions.end())
                existing.delay_positions.push_back(p);
        return SymbolId{it->second};
    }
    uint32_t idx = static_cast<uint32_t>(symbols_.size());
    symbols_.push_back(info);
    symbol_index_[key] = idx;
    return SymbolId{idx};
}

std::optional<SymbolId> TermStore::find_symbol(const std::string & name, uint32_t arity) const
{
    auto it = symbol_index_.find(name + "/" + std::to_string(arity));
    if (it == symbol_index_.end()) return std::nullopt;
    return SymbolId{it->second};
}

const SymbolInfo & TermStore::symbol(SymbolId s) const
{
    return symbols_.at(s.index);
}

uint64_t TermStore::node_hash(const Node & n) const
{
    uint64_t h = static_cast<uint64_t>(n.kind) * 0x2545f4914f6cdd1dULL;
    if (n.kind == TermKind::Application) h = mix(h, n.sym.index);
    for (Term a : n.args) h = mix(h, a.id);
    return h;
}

bool TermStore::node_matches(const Node & a, Term b) const
{
    const Node & nb = nodes_[b.id];
    if (!nb.live || a.kind != nb.kind) return false;
    if (a.kind == TermKind::Application && a.sym != nb.sym) return false;
    return a.args == nb.args;
}

Term TermStore::intern(Node && n)
{
    stats_.construction_requests++;
    n.hash = node_hash(n);
    if (sharing_) {
        auto it = table_.find(n.hash);
        if (it != table_.end())
            for (Term cand : it->second)
                if (node_matches(n, cand)) {
                    stats_.interning_hits++;
                    return cand;
                }
    }
    if (node_limit_ && stats_.unique_nodes >= node_limit_)
        throw ResourceError("term store node budget exceeded");
    n.live = true;
    Term t;
    if (!free_.empty()) {
        t.id = free_.back();
        free_.pop_back();
        nodes_[t.id] = std::move(n);
    } else {
        t.id = static_cast<uint32_t>(nodes_.size());
        nodes_.push_back(std::move(n));
    }
    if (sharing_) table_[nodes_[t.id].hash].push_back(t);
    stats_.unique_nodes++;
    stats_.peak_unique_nodes = std::max(stats_.peak_unique_nodes, stats_.unique_nodes);
    return t;
}

void TermStore::check_live(Term t, const char * what) const
{
    if (!t.valid() || t.id >= nodes_.size() || !nodes_[t.id].live)
        throw Error(std::string("dead or invalid term passed to ") + what);
}

Term TermStore::make_app(SymbolId symbol, const std::vector<Term> & args)
{
    const SymbolInfo & info = this->symbol(symbol);
    if (args.size() != info.arity)
        throw Error("arity mismatch constructing '" + info.name + "': expected "
                    + std::to_string(info.arity) + " arguments, got " + std::to_string(args.size()));
    for (Term a : args) check_live(a, "make_app");
    Node n;
    n.kind = TermKind::Application;
    n.sym = symbol;
    n.args = args;
    return intern(std::move(n));
}

Term TermStore::make_constant(const std::string & name)
{
    return make_app(intern_symbol(name, 0), {});
}

TermKind TermStore::kind(Term t) const
{
    check_live(t, "kind");
    return nodes_[t.id].kind;
}

SymbolId TermStore::app_symbol(Term t) const
{
    check_live(t, "app_symbol");
    if (nodes_[t.id].kind != TermKind::Application) throw Error("app_symbol of non-application");
    return nodes_[t.id].sym;
}

uint32_t TermStore::app_arity(Term t) const
{
    check_live(t, "app_arity");
    return static_cast<uint32_t>(nodes_[t.id].args.size());
}

Term TermStore::app_arg(Term t, uint32_t i) const
{
    check_live(t, "app_arg");
    const Node & n = nodes_[t.id];
    if (n.kind != TermKind::Application || i >= n.args.size()) throw Error("app_arg out of range");
    return n.args[i];
}

Term TermStore::cons(Term head, Term tail)
{
    check_live(head, "cons");
    check_live(tail, "cons");
    TermKind tk = nodes_[tail.id].kind;
    if (tk == TermKind::Application) throw Error("cons tail must be a list");
    Node n;
    n.kind = TermKind::ListNode;
    n.args = {head, tail};
    return intern(std::move(n));
}

Term TermStore::make_list(Term t)
{
    return cons(t, null());
}

Term TermStore::conc(Term l1, Term l2)
{
    check_live(l1, "conc");
    check_live(l2, "conc");
    if (!is_list(l1) || !is_list(l2)) throw Error("conc of non-list");
    // Rebuild the first list in front of the second; suffixes stay shared.
    std::vector<Term> prefix;
    for (Term p = l1; p != null(); p = list_tail(p)) prefix.push_back(list_head(p));
    Term result = l2;
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) result = cons(*it, result);
    return result;
}

Term TermStore::list_head(Term l) const
{
    check_live(l, "list_head");
    const Node & n = nodes_[l.id];
    if (n.kind != TermKind::ListNode) throw Error("list_head of empty or non-list");
    return n.args[0];
}

Term TermStore::list_tail(Term l) const
{
    check_live(l, "list_tail");
    const Node & n = nodes_[l.id];
    if (n.kind != TermKind::ListNode) throw Error("list_tail of empty or non-list");
    return n.args[1];
}

Term TermStore::list_last(Term l) const
{
    if (!not_empty_list(l)) throw Error("list_last of empty or non-list");
    Term p = l;
    while (list_tail(p) != null()) p = list_tail(p);
    return list_head(p);
}

Term TermStore::list_prefix(Term l)
{
    if (!not_empty_list(l)) throw Error("list_prefix of empty or non-list");
    std::vector<Term> elems = list_elements(l);
    elems.pop_back();
    return list_from(elems);
}

bool TermStore::not_empty_list(Term l) const
{
    check_live(l, "not_empty_list");
    return nodes_[l.id].kind == TermKind::ListNode;
}

bool TermStore::is_single_element(Term l) const
{
    return not_empty_list(l) && list_tail(l) == null();
}

bool TermStore::is_list(Term t) const
{
    check_live(t, "is_list");
    return nodes_[t.id].kind != TermKind::Application;
}

uint32_t TermStore::list_length(Term l) const
{
    uint32_t n = 0;
    for (Term p = l; not_empty_list(p); p = list_tail(p)) n++;
    return n;
}

Term TermStore::slice(Term p1, Term p2)
{
    check_live(p1, "slice");
    check_live(p2, "slice");
    std::vector<Term> elems;
    Term p = p1;
    while (p != p2) {
        if (!not_empty_list(p)) throw Error("slice: end position not reachable from start");
        elems.push_back(list_head(p));
        p = list_tail(p);
    }
    return list_from(elems);
}

std::vector<Term> TermStore::list_elements(Term l) const
{
    std::vector<Term> elems;
    for (Term p = l; not_empty_list(p); p = list_tail(p)) elems.push_back(list_head(p));
    return elems;
}

Term TermStore::list_from(const std::vector<Term> & elems)
{
    Term result = null();
    for (auto it = elems.rbegin(); it != elems.rend(); ++it) result = cons(*it, result);
    return result;
}

bool TermStore::term_equal(Term a, Term b) const
{
    if (sharing_) return a == b;
    return structural_equal(a, b);
}

bool TermStore::structural_equal(Term a, Term b) const
{
    std::vector<std::pair<Term, Term>> work{{a, b}};
    while (!work.empty()) {
        auto [x, y] = work.back();
        work.pop_back();
        if (x == y) continue;
        const Node & nx = nodes_[x.id];
        const Node & ny = nodes_[y.id];
        if (nx.kind != ny.kind) return false;
        if (nx.kind == TermKind::Application && nx.sym != ny.sym) return false;
        if (nx.args.size() != ny.args.size()) return false;
        for (size_t i = 0; i < nx.args.size(); i++) work.emplace_back(nx.args[i], ny.args[i]);
    }
    return true;
}

RootHandle TermStore::register_root(Term t)
{
    check_live(t, "register_root");
    RootHandle h = next_root_++;
    roots_[h] = t;
    return h;
}

void TermStore::unregister_root(RootHandle h)
{
    if (!roots_.erase(h)) stats_.double_unregister_warnings++;
}

uint64_t TermStore::add_root_provider(std::function<void(std::vector<Term> &)> fn)
{
    uint64_t id = next_provider_++;
    root_providers_[id] = std::move(fn);
    return id;
}

void TermStore::remove_root_provider(uint64_t id)
{
    root_providers_.erase(id);
}

uint64_t TermStore::collect()
{
    // Mark.
    std::vector<Term> work;
    for (auto & [h, t] : roots_) work.push_back(t);
    for (auto & [id, fn] : root_providers_) fn(work);
    while (!work.empty()) {
        Term t = work.back();
        work.pop_back();
        Node & n = nodes_[t.id];
        if (!n.live || n.mark) continue;
        n.mark = true;
        for (Term a : n.args) work.push_back(a);
    }
    // Sweep; reclaimed nodes leave the interning table as well.
    uint64_t reclaimed = 0;
    for (uint32_t i = 1; i < nodes_.size(); i++) {
        Node & n = nodes_[i];
        if (!n.live) continue;
        if (n.mark) {
            n.mark = false;
            continue;
        }
        if (sharing_) {
            auto it = table_.find(n.hash);
            if (it != table_.end()) {
                auto & bucket = it->second;
                bucket.erase(std::remove(bucket.begin(), bucket.end(), Term{i}), bucket.end());
                if (bucket.empty()) table_.erase(it);
            }
        }
        n.live = false;
        n.args.clear();
        free_.push_back(i);
        reclaimed++;
    }
    stats_.unique_nodes -= reclaimed;
    return reclaimed;
}

bool TermStore::live(Term t) const
{
    return t.valid() && t.id < nodes_.size() && nodes_[t.id].live;
}

const StoreStats & TermStore::stats() const
{
    stats_.table_capacity = table_.bucket_count();
    return stats_;
}

void TermStore::reset_peak()
{
    stats_.peak_unique_nodes = stats_.unique_nodes;
}

std::vector<Term> TermStore::live_terms() const
{
    std::vector<Term> out;
    for (uint32_t i = 1; i < nodes_.size(); i++)
        if (nodes_[i].live) out.push_back(Term{i});
    return out;
}

} // namespace rwc
