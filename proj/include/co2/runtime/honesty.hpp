#pragma once

/*
  Honesty of a principal A: along every fair maximal trace, A
  eventually discharges its obligations in every session it touches.

  The reachable state graph is explored breadth-first up to the given
  depth and size bounds.  A state is bad for A when some session of it
  leaves A unfulfilled.  Dishonesty witnesses:

    - a stuck state that is bad (a finite maximal trace ends there);

    - a strongly connected component of the graph sustaining a fair
      infinite trace that visits a bad state infinitely often.  A trace
      is fair when no summand stays enabled from some point on without
      ever being fired.  A component C sustains such a trace exactly
      when C has an internal edge, contains a bad state, and for every
      summand descriptor enabled somewhere in C either some state of C
      disables it or some internal edge of C fires it: a closed walk
      through all of C traversing those edges realises the trace, and
      conversely the states visited infinitely often by any fair bad
      trace form a strongly connected set inside such a component.

  If the bounds truncate the exploration and no witness was found the
  verdict is inconclusive; honesty is only certified on a fully
  explored graph.
*/

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "co2/runtime/steps.hpp"
#include "co2/runtime/system.hpp"
#include "co2/runtime/trace.hpp"

namespace co2::runtime {

enum class Verdict { Honest, Dishonest, Inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Honest: return "honest";
        case Verdict::Dishonest: return "dishonest";
        default: return "inconclusive";
    }
}

struct HonestyOptions {
    int max_depth = 64;
    int max_states = 20000;
};

struct HonestyWitness {
    std::vector<TraceRecord> stem;
    std::vector<TraceRecord> cycle;  // empty: the stem ends stuck
    Ident session;                   // a session left unfulfilled
    std::string obligations;
};

struct HonestyReport {
    Verdict verdict = Verdict::Inconclusive;
    std::optional<HonestyWitness> witness;
    int states = 0;
    bool truncated = false;
};

namespace detail {

struct HonestyEdge {
    int target;
    std::string rule;
    std::vector<Ident> agents;
    std::optional<Ident> session;
    std::string label;
    std::vector<int> fired;  // interned descriptors
};

template <ContractModel M>
struct HonestyGraph {
    std::vector<SystemState<M>> states;
    std::vector<std::string> prints;
    std::vector<bool> expanded;
    std::vector<bool> bad;
    std::vector<std::optional<Ident>> bad_session;
    std::vector<std::vector<HonestyEdge>> edges;
    std::vector<std::pair<int, int>> parent;  // (state, edge index), -1 at root
    std::map<std::string, int> index;
    std::map<std::pair<Ident, std::string>, int> descriptors;
};

template <ContractModel M>
TraceRecord edge_record(const HonestyGraph<M>& g, int from, int ei, int step) {
    const HonestyEdge& e = g.edges[from][ei];
    return TraceRecord{step,    e.rule,  e.agents,
                       e.session, e.label, g.prints[e.target]};
}

// Shortest path of edges from `from` to `to`, optionally restricted to
// an allowed set of states.
template <ContractModel M>
std::vector<std::pair<int, int>> path_between(const HonestyGraph<M>& g,
                                              int from, int to,
                                              const std::set<int>* inside) {
    if (from == to) return {};
    std::map<int, std::pair<int, int>> prev;
    std::queue<int> q;
    q.push(from);
    std::set<int> seen{from};
    while (!q.empty()) {
        int cur = q.front();
        q.pop();
        for (std::size_t ei = 0; ei < g.edges[cur].size(); ++ei) {
            int next = g.edges[cur][ei].target;
            if (inside && !inside->count(next)) continue;
            if (!seen.insert(next).second) continue;
            prev[next] = {cur, static_cast<int>(ei)};
            if (next == to) {
                std::vector<std::pair<int, int>> path;
                for (int at = to; at != from;) {
                    auto [p, pe] = prev.at(at);
                    path.emplace_back(p, pe);
                    at = p;
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            q.push(next);
        }
    }
    throw Error("internal: no path inside component");
}

}  // namespace detail

template <ContractModel M>
HonestyReport honesty_check(const SystemState<M>& initial, const Env<M>& env,
                            const Ident& principal,
                            const HonestyOptions& opts = {}) {
    detail::HonestyGraph<M> g;
    HonestyReport report;

    auto intern = [&](SystemState<M> s, int parent_state,
                      int parent_edge) -> int {
        std::string p = to_string<M>(s, env);
        auto it = g.index.find(p);
        if (it != g.index.end()) return it->second;
        int id = static_cast<int>(g.states.size());
        g.index.emplace(p, id);
        g.prints.push_back(std::move(p));
        g.expanded.push_back(false);
        bool bad = false;
        std::optional<Ident> bad_in;
        for (const auto& [name, contents] : s.sessions)
            if (!M::fulfilled(contents, principal, env.model)) {
                bad = true;
                bad_in = name;
                break;
            }
        g.bad.push_back(bad);
        g.bad_session.push_back(bad_in);
        g.edges.emplace_back();
        g.parent.emplace_back(parent_state, parent_edge);
        g.states.push_back(std::move(s));
        return id;
    };

    auto descriptor = [&](const std::pair<Ident, std::string>& d) {
        auto [it, fresh] =
            g.descriptors.emplace(d, static_cast<int>(g.descriptors.size()));
        (void)fresh;
        return it->second;
    };

    SystemState<M> root = freeze_names<M>(renormalise<M>(initial));
    intern(std::move(root), -1, -1);

    std::queue<std::pair<int, int>> frontier;  // (state, depth)
    frontier.emplace(0, 0);
    while (!frontier.empty()) {
        auto [id, depth] = frontier.front();
        frontier.pop();
        if (depth >= opts.max_depth ||
            static_cast<int>(g.states.size()) >= opts.max_states) {
            report.truncated = true;
            continue;
        }
        g.expanded[id] = true;
        for (auto& step : enumerate_steps<M>(g.states[id], env)) {
            int before = static_cast<int>(g.states.size());
            int target = intern(std::move(step.next), id,
                                static_cast<int>(g.edges[id].size()));
            std::vector<int> fired;
            fired.reserve(step.fired.size());
            for (const auto& d : step.fired) fired.push_back(descriptor(d));
            std::sort(fired.begin(), fired.end());
            g.edges[id].push_back(detail::HonestyEdge{
                target, std::move(step.rule), std::move(step.agents),
                std::move(step.session), std::move(step.label),
                std::move(fired)});
            if (target == before) frontier.emplace(target, depth + 1);
        }
    }
    report.states = static_cast<int>(g.states.size());

    auto stem_to = [&](int id) {
        std::vector<std::pair<int, int>> rev;
        for (int at = id; g.parent[at].first != -1;) {
            rev.push_back(g.parent[at]);
            at = g.parent[at].first;
        }
        std::reverse(rev.begin(), rev.end());
        std::vector<TraceRecord> stem;
        int n = 1;
        for (auto [s, e] : rev) stem.push_back(detail::edge_record(g, s, e, n++));
        return stem;
    };

    auto witness_at = [&](int id) {
        HonestyWitness w;
        w.stem = stem_to(id);
        w.session = *g.bad_session[id];
        const auto* contents = find_session<M>(g.states[id], w.session);
        w.obligations = M::obligations(*contents, principal, env.model);
        return w;
    };

    // Finite maximal traces: a stuck bad state.
    for (int id = 0; id < static_cast<int>(g.states.size()); ++id)
        if (g.expanded[id] && g.edges[id].empty() && g.bad[id]) {
            report.verdict = Verdict::Dishonest;
            report.witness = witness_at(id);
            return report;
        }

    // Infinite fair traces: accepting strongly connected components.
    // Iterative Tarjan over the expanded subgraph.
    int n = static_cast<int>(g.states.size());
    std::vector<int> order(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> sccs;
    int counter = 0;
    for (int start = 0; start < n; ++start) {
        if (order[start] != -1 || !g.expanded[start]) continue;
        std::vector<std::pair<int, std::size_t>> work{{start, 0}};
        while (!work.empty()) {
            auto& [v, ei] = work.back();
            if (ei == 0) {
                order[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            bool descended = false;
            while (ei < g.edges[v].size()) {
                int to = g.edges[v][ei].target;
                ++ei;
                if (!g.expanded[to]) continue;
                if (order[to] == -1) {
                    work.emplace_back(to, 0);
                    descended = true;
                    break;
                }
                if (on_stack[to]) low[v] = std::min(low[v], order[to]);
            }
            if (descended) continue;
            if (low[v] == order[v]) {
                std::vector<int> scc;
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = static_cast<int>(sccs.size());
                    scc.push_back(w);
                    if (w == v) break;
                }
                sccs.push_back(std::move(scc));
            }
            int finished = v;
            work.pop_back();
            if (!work.empty())
                low[work.back().first] =
                    std::min(low[work.back().first], low[finished]);
        }
    }

    for (const auto& scc : sccs) {
        std::set<int> inside(scc.begin(), scc.end());
        std::vector<std::pair<int, int>> internal;  // (state, edge index)
        for (int v : scc)
            for (std::size_t ei = 0; ei < g.edges[v].size(); ++ei)
                if (inside.count(g.edges[v][ei].target))
                    internal.emplace_back(v, static_cast<int>(ei));
        if (internal.empty()) continue;
        int bad_state = -1;
        for (int v : scc)
            if (g.bad[v]) {
                bad_state = v;
                break;
            }
        if (bad_state == -1) continue;

        // Per descriptor enabled somewhere in the component: an
        // obligation the witness cycle must discharge, either by
        // firing it on an internal edge or by visiting a state where
        // it is not enabled.
        std::map<int, std::set<int>> enabled_at;  // descriptor -> states
        for (int v : scc)
            for (const auto& e : g.edges[v])
                for (int d : e.fired) enabled_at[d].insert(v);
        bool accepting = true;
        std::vector<std::pair<int, int>> must_fire;
        std::vector<int> must_visit;
        for (const auto& [d, at] : enabled_at) {
            if (at.size() < scc.size()) {
                for (int v : scc)
                    if (!at.count(v)) {
                        must_visit.push_back(v);
                        break;
                    }
                continue;
            }
            auto fires = std::find_if(
                internal.begin(), internal.end(), [&](const auto& e) {
                    const auto& fired = g.edges[e.first][e.second].fired;
                    return std::binary_search(fired.begin(), fired.end(), d);
                });
            if (fires == internal.end()) {
                accepting = false;
                break;
            }
            must_fire.push_back(*fires);
        }
        if (!accepting) continue;

        // Close a walk from the bad state through every obligation.
        std::vector<std::pair<int, int>> walk;
        int at = bad_state;
        auto go = [&](int to) {
            auto leg = detail::path_between<M>(g, at, to, &inside);
            walk.insert(walk.end(), leg.begin(), leg.end());
            at = to;
        };
        for (auto [v, ei] : must_fire) {
            go(v);
            walk.emplace_back(v, ei);
            at = g.edges[v][ei].target;
        }
        for (int v : must_visit) go(v);
        if (walk.empty()) {
            auto [v, ei] = internal.front();
            go(v);
            walk.emplace_back(v, ei);
            at = g.edges[v][ei].target;
        }
        go(bad_state);

        report.verdict = Verdict::Dishonest;
        HonestyWitness w = witness_at(bad_state);
        int step = static_cast<int>(w.stem.size()) + 1;
        for (auto [v, ei] : walk)
            w.cycle.push_back(detail::edge_record(g, v, ei, step++));
        report.witness = std::move(w);
        return report;
    }

    report.verdict =
        report.truncated ? Verdict::Inconclusive : Verdict::Honest;
    return report;
}

}  // namespace co2::runtime
