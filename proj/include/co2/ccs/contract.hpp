#pragma once

/*
  Contracts as processes: CCS-like terms built from prefix-guarded sums
  of polarised atoms, principal tagging (A says c), parallel composition
  and recursion through named definitions.

  Atoms come in three disjoint classes: inputs a?, outputs a!, and
  autonomous actions a^ that a principal can fire without a partner
  (tau^ is just a reserved autonomous atom).

  Terms are kept in a canonical form that decides structural
  equivalence: parallel composition is flattened to a sorted multiset of
  components, 0 and A says 0 factors are dropped, and says distributes
  over parallel composition, so every component is a chain of says tags
  over either a sum or a process identifier. Distribution is what lets
  two parallel components of the same principal synchronise, which the
  process encoding of logical contracts relies on.
*/

#include <algorithm>
#include <compare>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "co2/ident.hpp"

namespace co2::ccs {

enum class Polarity { Input, Output, Autonomous };

struct Atom {
    std::string name;
    Polarity polarity = Polarity::Autonomous;

    auto operator<=>(const Atom&) const = default;

    std::string str() const {
        switch (polarity) {
            case Polarity::Input: return name + "?";
            case Polarity::Output: return name + "!";
            case Polarity::Autonomous: return name + "^";
        }
        return name;
    }
};

inline Atom tau_atom() { return Atom{"tau", Polarity::Autonomous}; }

// ---------------------------------------------------------------------
// Source-level terms
// ---------------------------------------------------------------------

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Branch {
    Atom atom;
    TermPtr cont;
};

struct Term {
    enum class Kind { Sum, Says, Par, Ref };
    Kind kind = Kind::Sum;

    std::vector<Branch> branches;  // Sum; empty = 0
    Ident principal;               // Says
    TermPtr body;                  // Says
    std::vector<TermPtr> parts;    // Par
    std::string ref;               // Ref
};

inline TermPtr zero() {
    static const TermPtr z = std::make_shared<Term>();
    return z;
}

inline TermPtr sum(std::vector<Branch> branches) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Sum;
    t->branches = std::move(branches);
    return t;
}

inline TermPtr prefix(Atom a, TermPtr cont) { return sum({Branch{a, std::move(cont)}}); }

inline TermPtr says(Ident principal, TermPtr body) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Says;
    t->principal = std::move(principal);
    t->body = std::move(body);
    return t;
}

inline TermPtr par(std::vector<TermPtr> parts) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Par;
    t->parts = std::move(parts);
    return t;
}

inline TermPtr ref(std::string name) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Ref;
    t->ref = std::move(name);
    return t;
}

// Named recursive definitions X = c. Bodies must be prefix-guarded.
using Defs = std::map<std::string, TermPtr>;

// ---------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------

struct State;

struct CanonBranch;

struct Component {
    std::vector<Ident> sayers;  // outermost tag first; may be empty
    bool is_ref = false;
    std::string ref;                    // when is_ref
    std::vector<CanonBranch> branches;  // when a sum; never empty here
};

struct State {
    std::vector<Component> comps;  // sorted multiset; empty = 0

    bool is_zero() const { return comps.empty(); }
};

struct CanonBranch {
    Atom atom;
    State cont;
};

int compare(const State& a, const State& b);

inline int compare(const Component& a, const Component& b) {
    if (a.sayers != b.sayers) return a.sayers < b.sayers ? -1 : 1;
    if (a.is_ref != b.is_ref) return a.is_ref ? -1 : 1;
    if (a.is_ref) return a.ref.compare(b.ref);
    if (a.branches.size() != b.branches.size())
        return a.branches.size() < b.branches.size() ? -1 : 1;
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
        if (auto c = a.branches[i].atom <=> b.branches[i].atom; c != 0)
            return c < 0 ? -1 : 1;
        if (int c = compare(a.branches[i].cont, b.branches[i].cont); c != 0) return c;
    }
    return 0;
}

inline int compare(const State& a, const State& b) {
    if (a.comps.size() != b.comps.size()) return a.comps.size() < b.comps.size() ? -1 : 1;
    for (std::size_t i = 0; i < a.comps.size(); ++i)
        if (int c = compare(a.comps[i], b.comps[i]); c != 0) return c;
    return 0;
}

inline bool operator==(const State& a, const State& b) { return compare(a, b) == 0; }
inline bool operator<(const State& a, const State& b) { return compare(a, b) < 0; }

inline void sort_components(std::vector<Component>& comps) {
    std::sort(comps.begin(), comps.end(),
              [](const Component& x, const Component& y) { return compare(x, y) < 0; });
}

inline State canonicalise(const TermPtr& t) {
    State out;
    switch (t->kind) {
        case Term::Kind::Sum: {
            if (t->branches.empty()) return out;
            Component comp;
            for (const auto& br : t->branches)
                comp.branches.push_back(CanonBranch{br.atom, canonicalise(br.cont)});
            std::sort(comp.branches.begin(), comp.branches.end(),
                      [](const CanonBranch& x, const CanonBranch& y) {
                          if (auto c = x.atom <=> y.atom; c != 0) return c < 0;
                          return compare(x.cont, y.cont) < 0;
                      });
            out.comps.push_back(std::move(comp));
            return out;
        }
        case Term::Kind::Says: {
            State inner = canonicalise(t->body);
            for (auto& comp : inner.comps)
                comp.sayers.insert(comp.sayers.begin(), t->principal);
            sort_components(inner.comps);
            return inner;
        }
        case Term::Kind::Par: {
            for (const auto& part : t->parts) {
                State inner = canonicalise(part);
                for (auto& comp : inner.comps) out.comps.push_back(std::move(comp));
            }
            sort_components(out.comps);
            return out;
        }
        case Term::Kind::Ref: {
            Component comp;
            comp.is_ref = true;
            comp.ref = t->ref;
            out.comps.push_back(std::move(comp));
            return out;
        }
    }
    return out;
}

// ---------------------------------------------------------------------
// Printing (canonical form prints back into the surface syntax)
// ---------------------------------------------------------------------

std::string to_string(const State& s);

inline std::string core_to_string(const Component& comp) {
    if (comp.is_ref) return comp.ref;
    std::ostringstream out;
    for (std::size_t i = 0; i < comp.branches.size(); ++i) {
        if (i) out << " + ";
        const auto& br = comp.branches[i];
        out << br.atom.str();
        if (!br.cont.is_zero()) {
            const State& k = br.cont;
            bool atomic_cont = k.comps.size() == 1 && k.comps[0].sayers.empty() &&
                               !k.comps[0].is_ref && k.comps[0].branches.size() == 1;
            out << ".";
            if (atomic_cont)
                out << to_string(k);
            else
                out << "(" << to_string(k) << ")";
        }
    }
    return out.str();
}

inline std::string to_string(const Component& comp) {
    std::string core = core_to_string(comp);
    for (auto it = comp.sayers.rbegin(); it != comp.sayers.rend(); ++it)
        core = *it + " says (" + core + ")";
    return core;
}

inline std::string to_string(const State& s) {
    if (s.is_zero()) return "0";
    std::ostringstream out;
    for (std::size_t i = 0; i < s.comps.size(); ++i) {
        if (i) out << " | ";
        out << to_string(s.comps[i]);
    }
    return out.str();
}

// ---------------------------------------------------------------------
// Free identifiers and substitution (says tags may be principal
// variables until an agreement closes them)
// ---------------------------------------------------------------------

inline void collect_free_vars(const TermPtr& t, std::set<Ident>& out) {
    switch (t->kind) {
        case Term::Kind::Sum:
            for (const auto& br : t->branches) collect_free_vars(br.cont, out);
            return;
        case Term::Kind::Says:
            if (is_variable(t->principal)) out.insert(t->principal);
            collect_free_vars(t->body, out);
            return;
        case Term::Kind::Par:
            for (const auto& part : t->parts) collect_free_vars(part, out);
            return;
        case Term::Kind::Ref: return;
    }
}

inline std::set<Ident> free_vars(const TermPtr& t) {
    std::set<Ident> out;
    collect_free_vars(t, out);
    return out;
}

inline TermPtr apply_subst(const Subst& sigma, const TermPtr& t) {
    switch (t->kind) {
        case Term::Kind::Sum: {
            std::vector<Branch> branches;
            branches.reserve(t->branches.size());
            for (const auto& br : t->branches)
                branches.push_back(Branch{br.atom, apply_subst(sigma, br.cont)});
            return sum(std::move(branches));
        }
        case Term::Kind::Says:
            return says(co2::apply_subst(sigma, t->principal), apply_subst(sigma, t->body));
        case Term::Kind::Par: {
            std::vector<TermPtr> parts;
            parts.reserve(t->parts.size());
            for (const auto& part : t->parts) parts.push_back(apply_subst(sigma, part));
            return par(std::move(parts));
        }
        case Term::Kind::Ref: return t;
    }
    return t;
}

inline void collect_free_vars(const State& s, std::set<Ident>& out) {
    for (const auto& comp : s.comps) {
        for (const auto& sayer : comp.sayers)
            if (is_variable(sayer)) out.insert(sayer);
        if (!comp.is_ref)
            for (const auto& br : comp.branches) collect_free_vars(br.cont, out);
    }
}

inline std::set<Ident> free_vars(const State& s) {
    std::set<Ident> out;
    collect_free_vars(s, out);
    return out;
}

inline State apply_subst(const Subst& sigma, const State& s) {
    State out;
    out.comps.reserve(s.comps.size());
    for (Component comp : s.comps) {
        for (auto& sayer : comp.sayers) sayer = co2::apply_subst(sigma, sayer);
        if (!comp.is_ref)
            for (auto& br : comp.branches) br.cont = apply_subst(sigma, br.cont);
        out.comps.push_back(std::move(comp));
    }
    sort_components(out.comps);
    return out;
}

// Prefix one principal onto every component, as composing A says c does.
inline State attribute(const Ident& principal, const State& s) {
    State out;
    out.comps.reserve(s.comps.size());
    for (Component comp : s.comps) {
        comp.sayers.insert(comp.sayers.begin(), principal);
        out.comps.push_back(std::move(comp));
    }
    sort_components(out.comps);
    return out;
}

// ---------------------------------------------------------------------
// Definition table validation
// ---------------------------------------------------------------------

namespace detail {
inline void check_guarded(const TermPtr& t, const Defs& defs, bool guarded,
                          const std::string& in) {
    switch (t->kind) {
        case Term::Kind::Sum:
            for (const auto& br : t->branches) check_guarded(br.cont, defs, true, in);
            return;
        case Term::Kind::Says: check_guarded(t->body, defs, guarded, in); return;
        case Term::Kind::Par:
            for (const auto& part : t->parts) check_guarded(part, defs, guarded, in);
            return;
        case Term::Kind::Ref:
            if (!defs.count(t->ref))
                throw Error("undefined process identifier " + t->ref +
                            (in.empty() ? "" : " in definition of " + in));
            if (!guarded)
                throw Error("unguarded occurrence of process identifier " + t->ref +
                            (in.empty() ? "" : " in definition of " + in));
            return;
    }
}
}  // namespace detail

// Every identifier must resolve, and identifiers inside definition
// bodies must sit under at least one prefix.
inline void validate_defs(const Defs& defs) {
    for (const auto& [name, body] : defs) detail::check_guarded(body, defs, false, name);
}

inline void validate_closed_refs(const TermPtr& t, const Defs& defs) {
    detail::check_guarded(t, defs, true, "");
}

}  // namespace co2::ccs
