#pragma once

/*
  Provability for clausal PCL.

  The decision procedure for C |- phi works in three stages:

    1. Seed the derived set with the unconditional atoms of C; a fact
       !a always carries its promise a with it.
    2. Compute the greatest set W of contractual clauses (premises -->>
       head) such that every clause in W has all its premises derivable
       by plain-implication closure from the seeds together with the
       heads of W.  Starting from all contractual clauses and deleting
       unsupported ones until stable reaches that greatest fixed point
       regardless of deletion order.
    3. The entailed set is the plain-implication closure of the seeds
       and the heads of W.  A disjunctive head contributes the exact
       disjunction, never a disjunct.

  Goals are decided against the entailed set: a positive /\ \/
  combination holds iff each disjunction of its normal form contains a
  derived atom or a whole derived disjunction; premises -> head holds
  iff head follows once the premises are added as unconditional atoms;
  premises -->> head holds iff the head follows outright, or some
  contractual clause of C with weaker premises and a stronger head
  subsumes the goal.  Anything else is rejected as unsupported rather
  than judged unprovable.
*/

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "co2/pcl/formula.hpp"

namespace co2::pcl {

struct UnsupportedGoalError : Error {
    using Error::Error;
};

// Everything derivable: plain atoms plus opaque disjunctions.
struct Derived {
    std::set<PclAtom> atoms;
    std::set<std::set<PclAtom>> disjunctions;
};

namespace detail {

inline void insert_atom(Derived& d, const PclAtom& a, bool& changed) {
    if (d.atoms.insert(a).second) changed = true;
    if (a.fact) {
        PclAtom p = a;
        p.fact = false;
        if (d.atoms.insert(p).second) changed = true;
    }
}

inline void insert_head(Derived& d, const HeadForm& head, bool& changed) {
    for (const auto& dis : head) {
        if (dis.size() == 1)
            insert_atom(d, *dis.begin(), changed);
        else if (d.disjunctions.insert(dis).second)
            changed = true;
    }
}

inline bool premises_hold(const Clause& c, const Derived& d) {
    for (const auto& p : c.premises)
        if (!d.atoms.count(p)) return false;
    return true;
}

inline Derived closure(const std::set<PclAtom>& seeds,
                       const std::vector<const Clause*>& imps,
                       const std::vector<const Clause*>& granted) {
    Derived d;
    bool changed = false;
    for (const auto& a : seeds) insert_atom(d, a, changed);
    for (const Clause* c : granted) insert_head(d, c->head, changed);
    do {
        changed = false;
        for (const Clause* c : imps)
            if (premises_hold(*c, d)) insert_head(d, c->head, changed);
    } while (changed);
    return d;
}

struct SplitEnv {
    std::vector<const Clause*> imps;
    std::vector<const Clause*> cimps;
};

inline SplitEnv split(const PclEnv& env) {
    SplitEnv s;
    for (const auto& c : env.clauses)
        (c.contractual ? s.cimps : s.imps).push_back(&c);
    return s;
}

inline std::vector<const Clause*> greatest_supported(const std::set<PclAtom>& seeds,
                                                     const SplitEnv& s) {
    std::vector<const Clause*> w = s.cimps;
    while (true) {
        Derived d = closure(seeds, s.imps, w);
        std::vector<const Clause*> kept;
        for (const Clause* c : w)
            if (premises_hold(*c, d)) kept.push_back(c);
        if (kept.size() == w.size()) return w;
        w = std::move(kept);
    }
}

}  // namespace detail

inline Derived entail_closure(const PclEnv& env) {
    detail::SplitEnv s = detail::split(env);
    auto w = detail::greatest_supported(env.atoms, s);
    return detail::closure(env.atoms, s.imps, w);
}

// One disjunction of a goal holds iff it contains a derived atom or
// includes a whole derived disjunction.
inline bool covered(const Derived& d, const std::set<PclAtom>& dis) {
    for (const auto& a : dis)
        if (d.atoms.count(a)) return true;
    for (const auto& big : d.disjunctions)
        if (std::includes(dis.begin(), dis.end(), big.begin(), big.end()))
            return true;
    return false;
}

inline bool eval_combo(const Derived& d, const HeadForm& goal) {
    for (const auto& dis : goal)
        if (!covered(d, dis)) return false;
    return true;
}

// Every disjunction of the weaker head contains some disjunction of
// the stronger one, so stronger |- weaker in the /\ \/ lattice.
inline bool head_entails(const HeadForm& stronger, const HeadForm& weaker) {
    for (const auto& w : weaker) {
        bool ok = false;
        for (const auto& s : stronger)
            if (std::includes(w.begin(), w.end(), s.begin(), s.end())) {
                ok = true;
                break;
            }
        if (!ok) return false;
    }
    return true;
}

namespace detail {

struct GoalUnit {
    bool is_clause = false;
    HeadForm combo;  // when !is_clause
    Clause clause;   // when is_clause
};

inline void goal_units(const FormulaPtr& f, const Ident& sayer,
                       std::vector<GoalUnit>& out) {
    switch (f->kind) {
        case Formula::Kind::And:
            goal_units(f->a, sayer, out);
            goal_units(f->b, sayer, out);
            return;
        case Formula::Kind::Says:
            goal_units(f->a, f->principal, out);
            return;
        case Formula::Kind::Imp:
        case Formula::Kind::CImp: {
            GoalUnit u;
            u.is_clause = true;
            u.clause.contractual = f->kind == Formula::Kind::CImp;
            u.clause.premises = premise_form(f->a, sayer);
            u.clause.head = head_form(f->b, sayer);
            canonicalise_clause(u.clause);
            out.push_back(std::move(u));
            return;
        }
        default: {
            GoalUnit u;
            u.combo = head_form(f, sayer);
            out.push_back(std::move(u));
            return;
        }
    }
}

}  // namespace detail

inline bool pcl_entails(const PclEnv& env, const FormulaPtr& goal) {
    std::vector<detail::GoalUnit> units;
    try {
        detail::goal_units(goal, {}, units);
    } catch (const Error& e) {
        throw UnsupportedGoalError(std::string("unsupported goal: ") + e.what());
    }

    Derived base = entail_closure(env);
    for (const auto& u : units) {
        if (!u.is_clause) {
            if (!eval_combo(base, u.combo)) return false;
            continue;
        }
        if (!u.clause.contractual) {
            // Deduction: move the premises into the environment.
            PclEnv extended = env;
            for (const auto& p : u.clause.premises) extended.atoms.insert(p);
            if (!eval_combo(entail_closure(extended), u.clause.head)) return false;
            continue;
        }
        // A contractual goal holds when its head is derivable outright,
        // or a clause of the environment subsumes it.
        if (eval_combo(base, u.clause.head)) continue;
        bool subsumed = false;
        for (const auto& c : env.clauses) {
            if (!c.contractual) continue;
            bool weaker_premises =
                std::includes(u.clause.premises.begin(), u.clause.premises.end(),
                              c.premises.begin(), c.premises.end());
            if (weaker_premises && head_entails(c.head, u.clause.head)) {
                subsumed = true;
                break;
            }
        }
        if (!subsumed) return false;
    }
    return true;
}

// ---------------------------------------------------------------------
// Contract LTS and fulfilment
// ---------------------------------------------------------------------

// Performing an action records both the promise and the fact; any
// principal may fire any atom.
inline PclEnv pcl_step(PclEnv env, const Ident& principal,
                       const std::string& action) {
    env.atoms.insert(promise(action, principal));
    env.atoms.insert(fact(action, principal));
    return env;
}

// The promises a principal is committed to but has not yet performed.
inline std::set<std::string> pcl_obligations(const PclEnv& env,
                                             const Ident& principal) {
    Derived d = entail_closure(env);
    std::set<std::string> out;
    for (const auto& name : atom_universe(env)) {
        if (covered(d, {promise(name, principal)}) &&
            !covered(d, {fact(name, principal)}))
            out.insert(name);
    }
    return out;
}

inline bool pcl_fulfilled(const PclEnv& env, const Ident& principal) {
    return pcl_obligations(env, principal).empty();
}

}  // namespace co2::pcl
