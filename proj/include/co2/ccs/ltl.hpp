#pragma once

/*
  LTL observables over contract action traces.

  Satisfaction is judged against every maximal trace of the transition
  graph: finite traces that end in a stuck state use finite-trace
  semantics (Next is strong and fails at the last position, <> needs a
  witness position, [] holds on the empty remainder), infinite traces
  are decided on the lasso structure of the finite graph.

  Atom semantics on a single label:
    a^ holds iff the label is the arity-1 tag <A says a^>;
    a? and a! both hold iff the label is the synchronisation
    <A1 says a?, A2 says a!> on that name.
  Bare labels of untagged components satisfy no atom.

  The decision procedure negates the goal into negation normal form
  (with weak next and release as the duals of strong next and until)
  and searches the product of the graph with a tableau expansion of the
  obligations for either an ending move into a stuck state that leaves
  no strong obligation behind, or a strongly connected component in
  which no until-obligation is deferred forever.
*/

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "co2/ccs/step.hpp"

namespace co2::ccs {

// ---------------------------------------------------------------------
// Surface formulas
// ---------------------------------------------------------------------

struct Ltl;
using LtlPtr = std::shared_ptr<const Ltl>;

struct Ltl {
    enum class Kind { AtomProp, True, False, Not, And, Or, Next, Eventually, Always, Until };
    Kind kind = Kind::True;
    Atom atom;   // AtomProp
    LtlPtr a, b; // operands
};

inline LtlPtr ltl_node(Ltl::Kind kind, LtlPtr a = nullptr, LtlPtr b = nullptr) {
    auto f = std::make_shared<Ltl>();
    f->kind = kind;
    f->a = std::move(a);
    f->b = std::move(b);
    return f;
}

inline LtlPtr ltl_atom(Atom a) {
    auto f = std::make_shared<Ltl>();
    f->kind = Ltl::Kind::AtomProp;
    f->atom = std::move(a);
    return f;
}

inline LtlPtr ltl_true() { return ltl_node(Ltl::Kind::True); }
inline LtlPtr ltl_false() { return ltl_node(Ltl::Kind::False); }
inline LtlPtr ltl_not(LtlPtr a) { return ltl_node(Ltl::Kind::Not, std::move(a)); }
inline LtlPtr ltl_and(LtlPtr a, LtlPtr b) {
    return ltl_node(Ltl::Kind::And, std::move(a), std::move(b));
}
inline LtlPtr ltl_or(LtlPtr a, LtlPtr b) {
    return ltl_node(Ltl::Kind::Or, std::move(a), std::move(b));
}
inline LtlPtr ltl_next(LtlPtr a) { return ltl_node(Ltl::Kind::Next, std::move(a)); }
inline LtlPtr ltl_eventually(LtlPtr a) {
    return ltl_node(Ltl::Kind::Eventually, std::move(a));
}
inline LtlPtr ltl_always(LtlPtr a) { return ltl_node(Ltl::Kind::Always, std::move(a)); }
inline LtlPtr ltl_until(LtlPtr a, LtlPtr b) {
    return ltl_node(Ltl::Kind::Until, std::move(a), std::move(b));
}

// Precedence for printing: unary operators bind tightest, then U, then
// /\, then \/.
inline std::string to_string(const LtlPtr& f) {
    auto wrap = [](const std::string& s, bool parens) {
        return parens ? "(" + s + ")" : s;
    };
    struct Printer {
        std::string go(const LtlPtr& f, int outer) const {
            auto wrap = [&](const std::string& s, int mine) {
                return mine < outer ? "(" + s + ")" : s;
            };
            switch (f->kind) {
                case Ltl::Kind::AtomProp: return f->atom.str();
                case Ltl::Kind::True: return "true";
                case Ltl::Kind::False: return "false";
                case Ltl::Kind::Not: return "!" + go(f->a, 4);
                case Ltl::Kind::Next: return wrap("X " + go(f->a, 4), 3);
                case Ltl::Kind::Eventually: return wrap("<> " + go(f->a, 4), 3);
                case Ltl::Kind::Always: return wrap("[] " + go(f->a, 4), 3);
                case Ltl::Kind::Until:
                    return wrap(go(f->a, 3) + " U " + go(f->b, 3), 2);
                case Ltl::Kind::And:
                    return wrap(go(f->a, 2) + " /\\ " + go(f->b, 2), 1);
                case Ltl::Kind::Or:
                    return wrap(go(f->a, 1) + " \\/ " + go(f->b, 1), 0);
            }
            return "";
        }
    };
    (void)wrap;
    return Printer{}.go(f, 0);
}

inline bool atom_holds(const Atom& a, const Label& l) {
    switch (a.polarity) {
        case Polarity::Autonomous:
            return l.kind == Label::Kind::Auto && l.atom.name == a.name;
        case Polarity::Input:
        case Polarity::Output:
            return l.kind == Label::Kind::Sync && l.atom.name == a.name;
    }
    return false;
}

// ---------------------------------------------------------------------
// Negation normal form with hash-consing
// ---------------------------------------------------------------------

namespace nnf {

struct Node;
using NodePtr = const Node*;

struct Node {
    enum class Kind { True, False, Lit, And, Or, NextS, NextW, Until, Release };
    Kind kind;
    Atom atom;           // Lit
    bool positive = true;
    NodePtr a = nullptr;
    NodePtr b = nullptr;
    int id = 0;
    int until_index = -1;  // consecutive numbering of Until nodes
};

class Factory {
  public:
    NodePtr make(Node proto) {
        auto key = std::make_tuple(static_cast<int>(proto.kind), proto.atom,
                                   proto.positive, proto.a ? proto.a->id : -1,
                                   proto.b ? proto.b->id : -1);
        auto it = interned_.find(key);
        if (it != interned_.end()) return it->second;
        proto.id = static_cast<int>(nodes_.size());
        if (proto.kind == Node::Kind::Until) proto.until_index = until_count_++;
        nodes_.push_back(std::make_unique<Node>(proto));
        NodePtr p = nodes_.back().get();
        interned_.emplace(key, p);
        return p;
    }

    int until_count() const { return until_count_; }

  private:
    using Key = std::tuple<int, Atom, bool, int, int>;
    std::map<Key, NodePtr> interned_;
    std::vector<std::unique_ptr<Node>> nodes_;
    int until_count_ = 0;
};

inline NodePtr to_nnf(const LtlPtr& f, bool negated, Factory& fac) {
    using K = Node::Kind;
    auto mk = [&](K kind, NodePtr a = nullptr, NodePtr b = nullptr) {
        Node n;
        n.kind = kind;
        n.a = a;
        n.b = b;
        return fac.make(n);
    };
    switch (f->kind) {
        case Ltl::Kind::True: return mk(negated ? K::False : K::True);
        case Ltl::Kind::False: return mk(negated ? K::True : K::False);
        case Ltl::Kind::AtomProp: {
            Node n;
            n.kind = K::Lit;
            n.atom = f->atom;
            n.positive = !negated;
            return fac.make(n);
        }
        case Ltl::Kind::Not: return to_nnf(f->a, !negated, fac);
        case Ltl::Kind::And:
            return mk(negated ? K::Or : K::And, to_nnf(f->a, negated, fac),
                      to_nnf(f->b, negated, fac));
        case Ltl::Kind::Or:
            return mk(negated ? K::And : K::Or, to_nnf(f->a, negated, fac),
                      to_nnf(f->b, negated, fac));
        case Ltl::Kind::Next:
            return mk(negated ? K::NextW : K::NextS, to_nnf(f->a, negated, fac));
        case Ltl::Kind::Eventually:
            return negated ? mk(K::Release, mk(K::False), to_nnf(f->a, true, fac))
                           : mk(K::Until, mk(K::True), to_nnf(f->a, false, fac));
        case Ltl::Kind::Always:
            return negated ? mk(K::Until, mk(K::True), to_nnf(f->a, true, fac))
                           : mk(K::Release, mk(K::False), to_nnf(f->a, false, fac));
        case Ltl::Kind::Until:
            return negated ? mk(K::Release, to_nnf(f->a, true, fac),
                                to_nnf(f->b, true, fac))
                           : mk(K::Until, to_nnf(f->a, false, fac),
                                to_nnf(f->b, false, fac));
    }
    return mk(K::True);
}

// One fully decomposed way of satisfying an obligation set at the
// current position: literal demands on the current label, obligations
// passed to the next position, and the untils that were deferred.
struct Move {
    std::set<std::pair<Atom, bool>> lits;
    std::set<NodePtr> next_strong;
    std::set<NodePtr> next_weak;
    std::set<int> deferred_untils;

    bool operator<(const Move& o) const {
        auto ids = [](const std::set<NodePtr>& s) {
            std::vector<int> v;
            for (auto p : s) v.push_back(p->id);
            return v;
        };
        return std::tie(lits, deferred_untils) < std::tie(o.lits, o.deferred_untils) ||
               (lits == o.lits && deferred_untils == o.deferred_untils &&
                std::make_pair(ids(next_strong), ids(next_weak)) <
                    std::make_pair(ids(o.next_strong), ids(o.next_weak)));
    }
};

inline void expand_rec(std::vector<NodePtr> todo, Move cur, std::vector<Move>& out) {
    while (!todo.empty()) {
        NodePtr f = todo.back();
        todo.pop_back();
        switch (f->kind) {
            case Node::Kind::True: break;
            case Node::Kind::False: return;  // dead branch
            case Node::Kind::Lit: cur.lits.insert({f->atom, f->positive}); break;
            case Node::Kind::And:
                todo.push_back(f->a);
                todo.push_back(f->b);
                break;
            case Node::Kind::Or: {
                auto left_todo = todo;
                left_todo.push_back(f->a);
                expand_rec(std::move(left_todo), cur, out);
                todo.push_back(f->b);
                break;
            }
            case Node::Kind::NextS: cur.next_strong.insert(f->a); break;
            case Node::Kind::NextW: cur.next_weak.insert(f->a); break;
            case Node::Kind::Until: {
                auto fulfil_todo = todo;
                fulfil_todo.push_back(f->b);
                expand_rec(std::move(fulfil_todo), cur, out);
                todo.push_back(f->a);
                cur.deferred_untils.insert(f->until_index);
                cur.next_strong.insert(f);
                break;
            }
            case Node::Kind::Release: {
                auto resolve_todo = todo;
                resolve_todo.push_back(f->a);
                resolve_todo.push_back(f->b);
                expand_rec(std::move(resolve_todo), cur, out);
                todo.push_back(f->b);
                cur.next_weak.insert(f);
                break;
            }
        }
    }
    out.push_back(std::move(cur));
}

inline std::vector<Move> expand(const std::vector<NodePtr>& obligations) {
    std::vector<Move> out;
    expand_rec(obligations, Move{}, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](const Move& x, const Move& y) {
                              return !(x < y) && !(y < x);
                          }),
              out.end());
    return out;
}

inline bool move_matches(const Move& m, const Label& l) {
    for (const auto& [atom, positive] : m.lits)
        if (atom_holds(atom, l) != positive) return false;
    return true;
}

// Satisfaction by the empty trace.  With no position to inspect,
// positive literals, strong next and until fail while negative
// literals, weak next and release hold vacuously.
inline bool empty_accepts(NodePtr f) {
    switch (f->kind) {
        case Node::Kind::True: return true;
        case Node::Kind::False: return false;
        case Node::Kind::Lit: return !f->positive;
        case Node::Kind::And: return empty_accepts(f->a) && empty_accepts(f->b);
        case Node::Kind::Or: return empty_accepts(f->a) || empty_accepts(f->b);
        case Node::Kind::NextS: return false;
        case Node::Kind::NextW: return true;
        case Node::Kind::Until: return false;
        case Node::Kind::Release: return true;
    }
    return false;
}

}  // namespace nnf

// ---------------------------------------------------------------------
// Existence of a maximal trace satisfying a formula
// ---------------------------------------------------------------------

struct TraceWitness {
    std::vector<Label> stem;
    std::vector<Label> cycle;  // empty for a finite maximal trace
};

namespace detail {

struct Product {
    struct Node {
        int graph_state;
        std::vector<int> obligations;  // sorted nnf ids
        bool operator<(const Node& o) const {
            return std::tie(graph_state, obligations) <
                   std::tie(o.graph_state, o.obligations);
        }
    };
    struct Edge {
        int from, to;
        int graph_label;
        std::set<int> deferred;
    };
    std::vector<Node> nodes;
    std::vector<std::vector<int>> out_edges;  // indices into edges
    std::vector<Edge> edges;
    std::vector<int> parent_edge;  // BFS tree for witness reconstruction
};

inline std::optional<TraceWitness> exists_satisfying(const Graph& g, nnf::NodePtr goal,
                                                     const nnf::Factory& fac,
                                                     int node_cap = 1 << 20) {
    // A stuck initial state admits only the empty maximal trace.
    if (g.stuck(0))
        return nnf::empty_accepts(goal)
                   ? std::optional<TraceWitness>(TraceWitness{{}, {}})
                   : std::nullopt;

    Product prod;
    std::map<Product::Node, int> index;
    std::map<std::vector<int>, std::vector<nnf::Move>> move_cache;
    std::map<int, nnf::NodePtr> id_to_node;

    auto node_of = [&](int id) { return id_to_node.at(id); };

    std::deque<int> frontier;
    auto intern = [&](Product::Node n, int via_edge) -> int {
        auto [it, fresh] = index.emplace(n, static_cast<int>(prod.nodes.size()));
        if (fresh) {
            if (static_cast<int>(prod.nodes.size()) >= node_cap)
                throw BoundedError("trace-search node cap exceeded");
            prod.nodes.push_back(n);
            prod.out_edges.emplace_back();
            prod.parent_edge.push_back(via_edge);
            frontier.push_back(it->second);
        }
        return it->second;
    };

    auto obligations_of = [&](const std::vector<int>& ids) {
        std::vector<nnf::NodePtr> v;
        for (int id : ids) v.push_back(node_of(id));
        return v;
    };

    auto stem_to = [&](int node) {
        std::vector<int> edge_ids;
        for (int at = node; prod.parent_edge[at] >= 0;) {
            int e = prod.parent_edge[at];
            edge_ids.push_back(e);
            at = prod.edges[e].from;
        }
        std::reverse(edge_ids.begin(), edge_ids.end());
        std::vector<Label> labels;
        for (int e : edge_ids) labels.push_back(g.labels[prod.edges[e].graph_label]);
        return labels;
    };

    std::vector<int> root_obl = {goal->id};
    id_to_node[goal->id] = goal;
    intern(Product::Node{0, root_obl}, -1);

    while (!frontier.empty()) {
        int cur = frontier.front();
        frontier.pop_front();
        Product::Node node = prod.nodes[cur];
        auto cache_it = move_cache.find(node.obligations);
        if (cache_it == move_cache.end()) {
            auto moves = nnf::expand(obligations_of(node.obligations));
            for (const auto& m : moves)
                for (auto p : m.next_strong) id_to_node[p->id] = p;
            for (const auto& m : moves)
                for (auto p : m.next_weak) id_to_node[p->id] = p;
            cache_it = move_cache.emplace(node.obligations, std::move(moves)).first;
        }
        const auto& moves = cache_it->second;

        for (const auto& m : moves) {
            for (const auto& ge : g.edges[node.graph_state]) {
                if (!nnf::move_matches(m, g.labels[ge.label])) continue;
                // The trace may end on this label: past the final
                // position weak obligations discharge vacuously, strong
                // ones cannot be met.
                if (g.stuck(ge.target) && m.next_strong.empty()) {
                    auto labels = stem_to(cur);
                    labels.push_back(g.labels[ge.label]);
                    return TraceWitness{std::move(labels), {}};
                }
                std::set<int> next_ids;
                for (auto p : m.next_strong) next_ids.insert(p->id);
                for (auto p : m.next_weak) next_ids.insert(p->id);
                Product::Node succ{ge.target,
                                   std::vector<int>(next_ids.begin(), next_ids.end())};
                int edge_id = static_cast<int>(prod.edges.size());
                int tgt = intern(succ, edge_id);
                prod.edges.push_back(
                    Product::Edge{cur, tgt, ge.label, m.deferred_untils});
                prod.out_edges[cur].push_back(edge_id);
            }
        }
    }

    // Infinite traces: find a strongly connected component with an
    // internal edge set in which every until is somewhere not deferred.
    int n = static_cast<int>(prod.nodes.size());
    std::vector<int> comp(n, -1), low(n, 0), disc(n, -1), stk;
    std::vector<bool> on_stack(n, false);
    int timer = 0, comp_count = 0;
    // Iterative Tarjan.
    struct Frame {
        int v;
        std::size_t edge_pos;
    };
    for (int start = 0; start < n; ++start) {
        if (disc[start] != -1) continue;
        std::vector<Frame> call_stack{{start, 0}};
        while (!call_stack.empty()) {
            auto& fr = call_stack.back();
            int v = fr.v;
            if (fr.edge_pos == 0) {
                disc[v] = low[v] = timer++;
                stk.push_back(v);
                on_stack[v] = true;
            }
            bool descended = false;
            while (fr.edge_pos < prod.out_edges[v].size()) {
                int e = prod.out_edges[v][fr.edge_pos++];
                int w = prod.edges[e].to;
                if (disc[w] == -1) {
                    call_stack.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], disc[w]);
            }
            if (descended) continue;
            if (low[v] == disc[v]) {
                while (true) {
                    int w = stk.back();
                    stk.pop_back();
                    on_stack[w] = false;
                    comp[w] = comp_count;
                    if (w == v) break;
                }
                ++comp_count;
            }
            call_stack.pop_back();
            if (!call_stack.empty()) {
                int parent = call_stack.back().v;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }

    int until_count = fac.until_count();
    for (int c = 0; c < comp_count; ++c) {
        std::vector<int> internal;
        for (std::size_t e = 0; e < prod.edges.size(); ++e)
            if (comp[prod.edges[e].from] == c && comp[prod.edges[e].to] == c)
                internal.push_back(static_cast<int>(e));
        if (internal.empty()) continue;
        bool accepting = true;
        for (int u = 0; u < until_count && accepting; ++u) {
            bool somewhere_clear = false;
            for (int e : internal)
                if (!prod.edges[e].deferred.count(u)) {
                    somewhere_clear = true;
                    break;
                }
            accepting = somewhere_clear;
        }
        if (!accepting) continue;

        // Build a closed walk through every internal edge of the
        // component, starting from its BFS-discovered entry node.
        int entry = -1;
        for (std::size_t i = 0; i < prod.nodes.size(); ++i)
            if (comp[i] == c && (entry == -1 || disc[i] < disc[entry]))
                entry = static_cast<int>(i);
        std::vector<Label> cycle;
        int at = entry;
        auto path_inside = [&](int from, int to, std::vector<Label>& out_labels) {
            if (from == to) return;
            std::map<int, int> parent;  // node -> edge id
            std::deque<int> bfs{from};
            parent[from] = -1;
            while (!bfs.empty()) {
                int x = bfs.front();
                bfs.pop_front();
                if (x == to) break;
                for (int e : prod.out_edges[x]) {
                    const auto& edge = prod.edges[e];
                    if (comp[edge.to] != c || parent.count(edge.to)) continue;
                    parent[edge.to] = e;
                    bfs.push_back(edge.to);
                }
            }
            std::vector<int> rev;
            for (int x = to; parent.at(x) != -1;) {
                int e = parent.at(x);
                rev.push_back(e);
                x = prod.edges[e].from;
            }
            std::reverse(rev.begin(), rev.end());
            for (int e : rev) out_labels.push_back(g.labels[prod.edges[e].graph_label]);
        };
        for (int e : internal) {
            path_inside(at, prod.edges[e].from, cycle);
            cycle.push_back(g.labels[prod.edges[e].graph_label]);
            at = prod.edges[e].to;
        }
        path_inside(at, entry, cycle);
        return TraceWitness{stem_to(entry), cycle};
    }
    return std::nullopt;
}

}  // namespace detail

// True iff some maximal trace of the graph satisfies phi; the witness
// describes it as stem plus optional cycle.
inline std::optional<TraceWitness> exists_trace(const Graph& g, const LtlPtr& phi) {
    nnf::Factory fac;
    nnf::NodePtr goal = nnf::to_nnf(phi, false, fac);
    return detail::exists_satisfying(g, goal, fac);
}

// Universal entailment: every maximal trace of c satisfies phi.
inline bool entails(const Graph& g, const LtlPtr& phi) {
    nnf::Factory fac;
    nnf::NodePtr negated = nnf::to_nnf(phi, true, fac);
    return !detail::exists_satisfying(g, negated, fac).has_value();
}

inline bool entails(const State& c, const Defs& defs, const LtlPtr& phi,
                    int state_cap = kDefaultStateCap) {
    return entails(reachable(c, defs, state_cap), phi);
}

}  // namespace co2::ccs
