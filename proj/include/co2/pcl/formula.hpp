#pragma once

/*
  Contracts-as-formulae: clausal PCL.

  Surface formulas are built from atoms (promises `a`, facts `!a`),
  truth constants, /\, \/, plain implication ->, contractual
  implication -->> and says-attribution.  A contract is a conjunction
  of says-wrapped clauses; each clause is a conjunction of atoms, or
  premises -> head, or premises -->> head, with premises a conjunction
  of atoms and the head a positive /\ \/ combination of atoms.

  Attribution resolves at normalisation: `A says phi` tags every atom
  of phi that has no closer says with A.  Untagged atoms are permitted
  in pure-logic contexts and carry an empty sayer.

  Normalised contracts and session contents are clause environments:
  a set of unconditional atoms plus implication clauses whose heads are
  kept as a conjunction of disjunction-sets.  The conjunction/
  disjunction fragment forms a distributive lattice, so that head
  normal form is logically equal to the original head.
*/

#include <algorithm>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "co2/ident.hpp"

namespace co2::pcl {

// ---------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------

struct PclAtom {
    std::string name;
    bool fact = false;    // !name once performed
    Ident sayer;          // empty when untagged

    auto operator<=>(const PclAtom&) const = default;

    std::string str() const {
        std::string core = (fact ? "!" : "") + name;
        return sayer.empty() ? core : sayer + " says " + core;
    }
};

inline PclAtom promise(std::string name, Ident sayer = {}) {
    return PclAtom{std::move(name), false, std::move(sayer)};
}

inline PclAtom fact(std::string name, Ident sayer = {}) {
    return PclAtom{std::move(name), true, std::move(sayer)};
}

// ---------------------------------------------------------------------
// Surface formulas
// ---------------------------------------------------------------------

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    enum class Kind { True, False, Atom, And, Or, Imp, CImp, Says };
    Kind kind = Kind::True;
    PclAtom atom;      // Atom
    Ident principal;   // Says
    FormulaPtr a, b;
};

inline FormulaPtr f_node(Formula::Kind kind, FormulaPtr a = nullptr,
                         FormulaPtr b = nullptr) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->a = std::move(a);
    f->b = std::move(b);
    return f;
}

inline FormulaPtr f_true() { return f_node(Formula::Kind::True); }
inline FormulaPtr f_false() { return f_node(Formula::Kind::False); }
inline FormulaPtr f_atom(PclAtom a) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Atom;
    f->atom = std::move(a);
    return f;
}
inline FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
    return f_node(Formula::Kind::And, std::move(a), std::move(b));
}
inline FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
    return f_node(Formula::Kind::Or, std::move(a), std::move(b));
}
inline FormulaPtr f_imp(FormulaPtr a, FormulaPtr b) {
    return f_node(Formula::Kind::Imp, std::move(a), std::move(b));
}
inline FormulaPtr f_cimp(FormulaPtr a, FormulaPtr b) {
    return f_node(Formula::Kind::CImp, std::move(a), std::move(b));
}
inline FormulaPtr f_says(Ident principal, FormulaPtr body) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Says;
    f->principal = std::move(principal);
    f->a = std::move(body);
    return f;
}

// Precedence for printing: says over an atom is written inline,
// conjunction binds tighter than disjunction, implications are lowest
// and non-associative.
inline std::string to_string(const FormulaPtr& f) {
    struct Printer {
        std::string go(const FormulaPtr& f, int outer) const {
            auto wrap = [&](const std::string& s, int mine) {
                return mine < outer ? "(" + s + ")" : s;
            };
            switch (f->kind) {
                case Formula::Kind::True: return "true";
                case Formula::Kind::False: return "false";
                case Formula::Kind::Atom: return f->atom.str();
                case Formula::Kind::And:
                    return wrap(go(f->a, 2) + " /\\ " + go(f->b, 2), 2);
                case Formula::Kind::Or:
                    return wrap(go(f->a, 1) + " \\/ " + go(f->b, 1), 1);
                case Formula::Kind::Imp:
                    return wrap(go(f->a, 1) + " -> " + go(f->b, 1), 0);
                case Formula::Kind::CImp:
                    return wrap(go(f->a, 1) + " -->> " + go(f->b, 1), 0);
                case Formula::Kind::Says:
                    if (f->a->kind == Formula::Kind::Atom &&
                        f->a->atom.sayer.empty())
                        return wrap(f->principal + " says " + go(f->a, 3), 3);
                    return f->principal + " says (" + go(f->a, 0) + ")";
            }
            return "";
        }
    };
    return Printer{}.go(f, 0);
}

inline void collect_free_vars(const FormulaPtr& f, std::set<Ident>& out) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            if (is_variable(f->atom.sayer)) out.insert(f->atom.sayer);
            return;
        case Formula::Kind::Says:
            if (is_variable(f->principal)) out.insert(f->principal);
            collect_free_vars(f->a, out);
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Imp:
        case Formula::Kind::CImp:
            collect_free_vars(f->a, out);
            collect_free_vars(f->b, out);
            return;
        default: return;
    }
}

inline std::set<Ident> free_vars(const FormulaPtr& f) {
    std::set<Ident> out;
    collect_free_vars(f, out);
    return out;
}

inline FormulaPtr apply_subst(const Subst& sigma, const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::True:
        case Formula::Kind::False: return f;
        case Formula::Kind::Atom: {
            PclAtom a = f->atom;
            a.sayer = a.sayer.empty() ? a.sayer : co2::apply_subst(sigma, a.sayer);
            return f_atom(std::move(a));
        }
        case Formula::Kind::Says:
            return f_says(co2::apply_subst(sigma, f->principal),
                          apply_subst(sigma, f->a));
        case Formula::Kind::And:
            return f_and(apply_subst(sigma, f->a), apply_subst(sigma, f->b));
        case Formula::Kind::Or:
            return f_or(apply_subst(sigma, f->a), apply_subst(sigma, f->b));
        case Formula::Kind::Imp:
            return f_imp(apply_subst(sigma, f->a), apply_subst(sigma, f->b));
        case Formula::Kind::CImp:
            return f_cimp(apply_subst(sigma, f->a), apply_subst(sigma, f->b));
    }
    return f;
}

// ---------------------------------------------------------------------
// Clause environments
// ---------------------------------------------------------------------

// Head in conjunction-of-disjunctions form.  A singleton disjunction
// is a plain atom; the empty conjunction is truth, the empty
// disjunction falsity.
using HeadForm = std::vector<std::set<PclAtom>>;

struct Clause {
    bool contractual = false;          // -->> rather than ->
    std::vector<PclAtom> premises;     // sorted, deduplicated conjunction
    HeadForm head;                     // sorted, absorption-reduced

    auto operator<=>(const Clause&) const = default;
};

struct PclEnv {
    std::set<PclAtom> atoms;       // unconditional conjuncts
    std::vector<Clause> clauses;   // sorted, deduplicated

    auto operator<=>(const PclEnv&) const = default;
};

inline void canonicalise_head(HeadForm& head) {
    std::sort(head.begin(), head.end());
    head.erase(std::unique(head.begin(), head.end()), head.end());
    // Absorption: a disjunction implied by a smaller one says nothing.
    HeadForm kept;
    for (const auto& d : head) {
        bool absorbed = false;
        for (const auto& other : head)
            if (other != d &&
                std::includes(d.begin(), d.end(), other.begin(), other.end()) &&
                !(d == other)) {
                absorbed = true;
                break;
            }
        if (!absorbed) kept.push_back(d);
    }
    head = std::move(kept);
}

inline void canonicalise_clause(Clause& c) {
    std::sort(c.premises.begin(), c.premises.end());
    c.premises.erase(std::unique(c.premises.begin(), c.premises.end()),
                     c.premises.end());
    canonicalise_head(c.head);
}

inline void canonicalise_env(PclEnv& env) {
    for (auto& c : env.clauses) canonicalise_clause(c);
    std::sort(env.clauses.begin(), env.clauses.end());
    env.clauses.erase(std::unique(env.clauses.begin(), env.clauses.end()),
                      env.clauses.end());
}

inline std::string to_string(const HeadForm& head) {
    if (head.empty()) return "true";
    std::ostringstream out;
    bool outer_first = true;
    bool outer_parens = head.size() > 1;
    for (const auto& d : head) {
        if (!outer_first) out << " /\\ ";
        outer_first = false;
        if (d.empty()) {
            out << "false";
            continue;
        }
        bool inner_parens = outer_parens && d.size() > 1;
        if (inner_parens) out << "(";
        bool first = true;
        for (const auto& a : d) {
            if (!first) out << " \\/ ";
            first = false;
            out << a.str();
        }
        if (inner_parens) out << ")";
    }
    return out.str();
}

inline std::string to_string(const Clause& c) {
    std::ostringstream out;
    if (c.premises.empty()) {
        out << "true";
    } else {
        for (std::size_t i = 0; i < c.premises.size(); ++i) {
            if (i) out << " /\\ ";
            out << c.premises[i].str();
        }
    }
    out << (c.contractual ? " -->> " : " -> ");
    bool head_parens =
        c.head.size() > 1 || (c.head.size() == 1 && c.head[0].size() > 1);
    if (head_parens) out << "(";
    out << to_string(c.head);
    if (head_parens) out << ")";
    return out.str();
}

inline std::string to_string(const PclEnv& env) {
    std::ostringstream out;
    bool first = true;
    for (const auto& a : env.atoms) {
        if (!first) out << " /\\ ";
        first = false;
        out << a.str();
    }
    for (const auto& c : env.clauses) {
        if (!first) out << " /\\ ";
        first = false;
        out << "(" << to_string(c) << ")";
    }
    return first ? "true" : out.str();
}

// ---------------------------------------------------------------------
// Normalisation of surface formulas into clause environments
// ---------------------------------------------------------------------

namespace detail {

inline PclAtom tag(PclAtom a, const Ident& sayer) {
    if (a.sayer.empty()) a.sayer = sayer;
    return a;
}

// Flatten a positive /\ \/ combination of atoms into head normal form.
// Throws when the formula leaves the positive fragment.
inline HeadForm head_form(const FormulaPtr& f, const Ident& sayer) {
    switch (f->kind) {
        case Formula::Kind::True: return {};
        case Formula::Kind::False: return {std::set<PclAtom>{}};
        case Formula::Kind::Atom: return {{tag(f->atom, sayer)}};
        case Formula::Kind::Says: {
            if (f->a->kind != Formula::Kind::Atom)
                throw Error("says inside a head must wrap a single atom");
            return {{tag(tag(f->a->atom, f->principal), sayer)}};
        }
        case Formula::Kind::And: {
            HeadForm left = head_form(f->a, sayer);
            HeadForm right = head_form(f->b, sayer);
            left.insert(left.end(), right.begin(), right.end());
            canonicalise_head(left);
            return left;
        }
        case Formula::Kind::Or: {
            HeadForm left = head_form(f->a, sayer);
            HeadForm right = head_form(f->b, sayer);
            HeadForm out;
            for (const auto& dl : left)
                for (const auto& dr : right) {
                    std::set<PclAtom> d = dl;
                    d.insert(dr.begin(), dr.end());
                    out.push_back(std::move(d));
                }
            canonicalise_head(out);
            return out;
        }
        default:
            throw Error("implication is not allowed inside a head or premise");
    }
}

// Premises are a conjunction of (says-)atoms.
inline std::vector<PclAtom> premise_form(const FormulaPtr& f, const Ident& sayer) {
    HeadForm h = head_form(f, sayer);
    std::vector<PclAtom> out;
    for (const auto& d : h) {
        if (d.size() != 1)
            throw Error("premises must be a conjunction of atoms");
        out.push_back(*d.begin());
    }
    return out;
}

inline void add_clause(PclEnv& env, const FormulaPtr& f, const Ident& sayer) {
    switch (f->kind) {
        case Formula::Kind::True: return;
        case Formula::Kind::False:
            throw Error("false is not a contract clause");
        case Formula::Kind::Says:
            add_clause(env, f->a, f->principal);
            return;
        case Formula::Kind::And:
            add_clause(env, f->a, sayer);
            add_clause(env, f->b, sayer);
            return;
        case Formula::Kind::Atom:
            env.atoms.insert(tag(f->atom, sayer));
            return;
        case Formula::Kind::Or: {
            // An unconditional positive combination: keep it as a
            // premise-free clause so its disjunctions stay opaque.
            Clause c;
            c.head = head_form(f, sayer);
            env.clauses.push_back(std::move(c));
            return;
        }
        case Formula::Kind::Imp:
        case Formula::Kind::CImp: {
            Clause c;
            c.contractual = f->kind == Formula::Kind::CImp;
            c.premises = premise_form(f->a, sayer);
            c.head = head_form(f->b, sayer);
            for (const auto& d : c.head)
                if (d.empty()) throw Error("false is not allowed in a contract head");
            env.clauses.push_back(std::move(c));
            return;
        }
    }
}

}  // namespace detail

// Normalise one attributed contract into clause form.  The sayer tags
// every atom not already under a closer says; an empty sayer leaves
// atoms untagged for pure-logic use.
inline PclEnv normalise(const FormulaPtr& f, const Ident& sayer = {}) {
    PclEnv env;
    detail::add_clause(env, f, sayer);
    canonicalise_env(env);
    return env;
}

inline void merge(PclEnv& into, const PclEnv& from) {
    into.atoms.insert(from.atoms.begin(), from.atoms.end());
    into.clauses.insert(into.clauses.end(), from.clauses.begin(),
                        from.clauses.end());
    canonicalise_env(into);
}

// Contract validation at parse time: normalisation succeeds or throws.
inline void validate_contract(const FormulaPtr& f) { normalise(f); }

// Every atom name that occurs anywhere in the environment.
inline std::set<std::string> atom_universe(const PclEnv& env) {
    std::set<std::string> names;
    for (const auto& a : env.atoms) names.insert(a.name);
    for (const auto& c : env.clauses) {
        for (const auto& p : c.premises) names.insert(p.name);
        for (const auto& d : c.head)
            for (const auto& a : d) names.insert(a.name);
    }
    return names;
}

}  // namespace co2::pcl
