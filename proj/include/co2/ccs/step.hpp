#pragma once

/*
  Labelled transition relation for contracts-as-processes.

  Transitions at the top level come in three shapes:
    - bare atom labels, fired by components that carry no says tag
      (these arise for raw terms such as OUT(q) on its own);
    - <A says a^>, an autonomous action of a singly-tagged component;
    - <A1 says a?, A2 says a!>, the synchronisation of an input and an
      output with the same underlying name across two singly-tagged
      components (A1 = A2 is allowed).

  Components wrapped in two or more says tags have no top-level
  transitions: no rule lifts a tagged label through a further tag.
  Process identifiers are unfolded lazily at step time, so states in
  the reachability graph keep their identifiers and stay finite for
  guarded definitions.
*/

#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "co2/ccs/contract.hpp"

namespace co2::ccs {

struct Label {
    enum class Kind { Bare, Auto, Sync };
    Kind kind = Kind::Bare;
    Atom atom;        // Bare and Auto; for Sync, the shared name with Input polarity
    Ident principal;  // Auto: the actor; Sync: the input side
    Ident partner;    // Sync: the output side

    auto operator<=>(const Label&) const = default;

    std::string str() const {
        switch (kind) {
            case Kind::Bare: return atom.str();
            case Kind::Auto: return "<" + principal + " says " + atom.str() + ">";
            case Kind::Sync:
                return "<" + principal + " says " + atom.name + "?, " + partner +
                       " says " + atom.name + "!>";
        }
        return "";
    }
};

inline Label auto_label(Ident principal, Atom a) {
    Label l;
    l.kind = Label::Kind::Auto;
    l.principal = std::move(principal);
    l.atom = std::move(a);
    return l;
}

inline Label sync_label(Ident input_side, Ident output_side, std::string name) {
    Label l;
    l.kind = Label::Kind::Sync;
    l.principal = std::move(input_side);
    l.partner = std::move(output_side);
    l.atom = Atom{std::move(name), Polarity::Input};
    return l;
}

namespace detail {

// One unfolding step: a Ref component becomes the components of its
// definition body under the same says chain. Guardedness means the
// result exposes no further Ref cores.
inline std::vector<Component> unfold(const Component& comp, const Defs& defs) {
    if (!comp.is_ref) return {comp};
    auto it = defs.find(comp.ref);
    if (it == defs.end()) throw Error("undefined process identifier " + comp.ref);
    State body = canonicalise(it->second);
    std::vector<Component> out;
    for (auto& inner : body.comps) {
        if (inner.is_ref)
            throw Error("unguarded occurrence of process identifier " + inner.ref +
                        " in definition of " + comp.ref);
        inner.sayers.insert(inner.sayers.begin(), comp.sayers.begin(), comp.sayers.end());
        out.push_back(std::move(inner));
    }
    return out;
}

inline State replace_component(const State& s, std::size_t at,
                               const std::vector<const State*>& add,
                               const std::vector<std::vector<Ident>>& add_sayers,
                               std::optional<std::size_t> also_drop = {}) {
    State out;
    for (std::size_t i = 0; i < s.comps.size(); ++i) {
        if (i == at || (also_drop && i == *also_drop)) continue;
        out.comps.push_back(s.comps[i]);
    }
    for (std::size_t k = 0; k < add.size(); ++k) {
        for (Component comp : add[k]->comps) {
            comp.sayers.insert(comp.sayers.begin(), add_sayers[k].begin(),
                               add_sayers[k].end());
            out.comps.push_back(std::move(comp));
        }
    }
    sort_components(out.comps);
    return out;
}

}  // namespace detail

// All derivable top-level transitions, successors in canonical form.
inline std::vector<std::pair<Label, State>> step(const State& s, const Defs& defs) {
    // Expand each component to its sum form, remembering its origin.
    struct Offer {
        std::size_t origin;
        std::vector<Ident> sayers;
        const CanonBranch* branch;
    };
    std::vector<std::vector<Component>> expanded(s.comps.size());
    std::vector<Offer> offers;
    for (std::size_t i = 0; i < s.comps.size(); ++i) {
        expanded[i] = detail::unfold(s.comps[i], defs);
        for (const auto& comp : expanded[i])
            for (const auto& br : comp.branches)
                offers.push_back(Offer{i, comp.sayers, &br});
    }

    std::vector<std::pair<Label, State>> out;
    auto emit = [&](Label label, State succ) {
        for (const auto& [l, t] : out)
            if (l == label && t == succ) return;
        out.emplace_back(std::move(label), std::move(succ));
    };

    for (const auto& offer : offers) {
        if (offer.sayers.empty()) {
            // Untagged component: every branch fires with a bare label.
            Label l;
            l.atom = offer.branch->atom;
            emit(l, detail::replace_component(s, offer.origin, {&offer.branch->cont}, {{}}));
        } else if (offer.sayers.size() == 1 &&
                   offer.branch->atom.polarity == Polarity::Autonomous) {
            emit(auto_label(offer.sayers[0], offer.branch->atom),
                 detail::replace_component(s, offer.origin, {&offer.branch->cont},
                                           {offer.sayers}));
        }
    }

    // Synchronisation of an input and an output across two components.
    for (std::size_t i = 0; i < offers.size(); ++i) {
        const auto& in = offers[i];
        if (in.sayers.size() != 1 || in.branch->atom.polarity != Polarity::Input) continue;
        for (std::size_t j = 0; j < offers.size(); ++j) {
            const auto& outp = offers[j];
            if (outp.sayers.size() != 1 || outp.branch->atom.polarity != Polarity::Output)
                continue;
            if (in.origin == outp.origin) continue;  // distinct parallel components
            if (in.branch->atom.name != outp.branch->atom.name) continue;
            emit(sync_label(in.sayers[0], outp.sayers[0], in.branch->atom.name),
                 detail::replace_component(s, in.origin,
                                           {&in.branch->cont, &outp.branch->cont},
                                           {in.sayers, outp.sayers}, outp.origin));
        }
    }
    return out;
}

// ---------------------------------------------------------------------
// Reachability
// ---------------------------------------------------------------------

struct Graph {
    std::vector<State> states;  // index 0 is the initial state
    std::vector<Label> labels;
    struct Edge {
        int label;
        int target;
    };
    std::vector<std::vector<Edge>> edges;

    bool stuck(int state) const { return edges[state].empty(); }

    int intern_label(const Label& l) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == l) return static_cast<int>(i);
        labels.push_back(l);
        return static_cast<int>(labels.size()) - 1;
    }
};

inline constexpr int kDefaultStateCap = 10000;

// Breadth-first exploration up to state_cap distinct canonical states.
// Exceeding the cap raises BoundedError rather than truncating.
inline Graph reachable(const State& initial, const Defs& defs, int state_cap) {
    Graph g;
    std::map<State, int> index;
    std::deque<int> frontier;
    g.states.push_back(initial);
    g.edges.emplace_back();
    index.emplace(initial, 0);
    frontier.push_back(0);
    while (!frontier.empty()) {
        int cur = frontier.front();
        frontier.pop_front();
        State state = g.states[cur];
        for (auto& [label, succ] : step(state, defs)) {
            auto [it, fresh] = index.emplace(succ, static_cast<int>(g.states.size()));
            if (fresh) {
                if (static_cast<int>(g.states.size()) >= state_cap)
                    throw BoundedError("state cap of " + std::to_string(state_cap) +
                                       " exceeded while exploring contract transitions");
                g.states.push_back(succ);
                g.edges.emplace_back();
                frontier.push_back(it->second);
            }
            g.edges[cur].push_back(Graph::Edge{g.intern_label(label), it->second});
        }
    }
    return g;
}

// Fulfilment: every says-decomposition of c for A has residual 0, i.e.
// no canonical component is headed by A.
inline bool fulfilled(const State& s, const Ident& principal) {
    for (const auto& comp : s.comps)
        if (!comp.sayers.empty() && comp.sayers[0] == principal) return false;
    return true;
}

}  // namespace co2::ccs
