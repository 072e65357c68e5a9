#pragma once

/*
  Encoding of clausal PCL contracts without disjunction or facts into
  contracts-as-processes, and executable checks of the two
  correspondence statements between the logical and the process view.

  A formula in the encodable fragment is a conjunction of says-wrapped
  conjuncts; each conjunct is a conjunction of promises, or
  premises -> head, or premises -->> head, with atom heads.  Writing
  q/A for the atom q tagged by principal A:

    a conjunction of promises becomes parallel OUT(q/A) components;
    a plain implication becomes the premise input chain
      (p1/B1)?...(pn/Bn)? followed by the parallel OUTs of its head;
    a contractual implication puts the OUTs in parallel with the
      input chain, making the head available before the premises;
    OUT(q) is the recursive process tau^.0 + q!.OUT(q), which may
      always either give the promise up or keep offering it.

  The latent actions of a formula are every (principal, atom) pair it
  mentions: head atoms tagged by the sayer of their conjunct, premise
  atoms by their own tag.

  The first correspondence: the formula entails all its latent actions
  iff the encoded process can reach the empty process.  The second:
  every maximal firing run of the formula that leaves all principals
  fulfilled has fired all latent actions, iff some run of the encoding
  reaches a state where every involved principal is fulfilled.  The
  logical side of the first statement also decides the run-based
  statement, because firing only already-entailed atoms never grows
  the greatest supported clause set.
*/

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "co2/ccs/contract.hpp"
#include "co2/ccs/step.hpp"
#include "co2/pcl/entail.hpp"
#include "co2/pcl/formula.hpp"

namespace co2::encoding {

struct FragmentError : Error {
    using Error::Error;
};

// One conjunct of the encodable fragment, premise order preserved.
struct MinusClause {
    Ident sayer;
    bool has_imp = false;      // plain promise conjunction when false
    bool contractual = false;
    std::vector<pcl::PclAtom> premises;
    std::vector<pcl::PclAtom> head;
};

namespace detail {

inline pcl::PclAtom minus_atom(const pcl::FormulaPtr& f, const Ident& sayer,
                               bool is_head) {
    using K = pcl::Formula::Kind;
    pcl::PclAtom a;
    if (f->kind == K::Atom) {
        a = f->atom;
    } else if (f->kind == K::Says && f->a->kind == K::Atom) {
        a = f->a->atom;
        if (a.sayer.empty()) a.sayer = f->principal;
    } else {
        throw FragmentError("expected an atom, found: " + to_string(f));
    }
    if (a.fact)
        throw FragmentError("facts cannot be encoded: " + a.str());
    if (a.sayer.empty()) a.sayer = sayer;
    if (is_head && a.sayer != sayer)
        throw FragmentError("head atom " + a.str() +
                            " is not owned by the conjunct sayer " + sayer);
    return a;
}

inline void minus_atoms(const pcl::FormulaPtr& f, const Ident& sayer, bool is_head,
                        std::vector<pcl::PclAtom>& out) {
    if (f->kind == pcl::Formula::Kind::And) {
        minus_atoms(f->a, sayer, is_head, out);
        minus_atoms(f->b, sayer, is_head, out);
        return;
    }
    out.push_back(minus_atom(f, sayer, is_head));
}

inline MinusClause minus_clause(const pcl::FormulaPtr& body, const Ident& sayer) {
    using K = pcl::Formula::Kind;
    MinusClause c;
    c.sayer = sayer;
    switch (body->kind) {
        case K::True: return c;  // empty promise conjunction
        case K::Imp:
        case K::CImp:
            c.has_imp = true;
            c.contractual = body->kind == K::CImp;
            minus_atoms(body->a, sayer, false, c.premises);
            if (body->b->kind != K::True) minus_atoms(body->b, sayer, true, c.head);
            return c;
        default:
            minus_atoms(body, sayer, true, c.head);
            return c;
    }
}

}  // namespace detail

// Destructure a formula into encodable conjuncts; throws FragmentError
// outside the fragment.
inline std::vector<MinusClause> parse_minus(const pcl::FormulaPtr& f) {
    using K = pcl::Formula::Kind;
    switch (f->kind) {
        case K::True: return {};
        case K::And: {
            auto left = parse_minus(f->a);
            auto right = parse_minus(f->b);
            left.insert(left.end(), right.begin(), right.end());
            return left;
        }
        case K::Says: return {detail::minus_clause(f->a, f->principal)};
        default:
            throw FragmentError("every conjunct must be says-wrapped: " +
                                to_string(f));
    }
}

// All (principal, atom-name) pairs the formula commits to.
inline std::set<std::pair<Ident, std::string>> latent_actions(
    const std::vector<MinusClause>& clauses) {
    std::set<std::pair<Ident, std::string>> out;
    for (const auto& c : clauses) {
        for (const auto& p : c.premises) out.insert({p.sayer, p.name});
        for (const auto& h : c.head) out.insert({h.sayer, h.name});
    }
    return out;
}

inline std::set<std::pair<Ident, std::string>> latent_actions(
    const pcl::FormulaPtr& f) {
    return latent_actions(parse_minus(f));
}

struct Encoded {
    ccs::State state;
    ccs::Defs defs;
};

// Injective tagging of an atom with the principal it belongs to.
inline std::string mangle(const Ident& principal, const std::string& atom) {
    return atom + "/" + principal;
}

inline Encoded encode(const std::vector<MinusClause>& clauses) {
    Encoded enc;
    auto out_ref = [&](const pcl::PclAtom& a) {
        std::string tagged = mangle(a.sayer, a.name);
        std::string def_name = "OUT_" + tagged;
        if (!enc.defs.count(def_name)) {
            ccs::TermPtr body = ccs::sum(
                {ccs::Branch{ccs::tau_atom(), ccs::zero()},
                 ccs::Branch{ccs::Atom{tagged, ccs::Polarity::Output},
                             ccs::ref(def_name)}});
            enc.defs.emplace(def_name, std::move(body));
        }
        return ccs::ref(def_name);
    };

    std::vector<ccs::TermPtr> conjuncts;
    for (const auto& c : clauses) {
        std::vector<ccs::TermPtr> outs;
        outs.reserve(c.head.size());
        for (const auto& h : c.head) outs.push_back(out_ref(h));

        ccs::TermPtr body;
        if (!c.has_imp) {
            body = ccs::par(outs);
        } else {
            auto chain_tail = [&](ccs::TermPtr tail) {
                for (auto it = c.premises.rbegin(); it != c.premises.rend(); ++it)
                    tail = ccs::prefix(
                        ccs::Atom{mangle(it->sayer, it->name), ccs::Polarity::Input},
                        std::move(tail));
                return tail;
            };
            if (c.contractual)
                body = ccs::par({ccs::par(outs), chain_tail(ccs::zero())});
            else
                body = chain_tail(ccs::par(outs));
        }
        conjuncts.push_back(ccs::says(c.sayer, std::move(body)));
    }
    enc.state = ccs::canonicalise(ccs::par(std::move(conjuncts)));
    return enc;
}

inline Encoded encode(const pcl::FormulaPtr& f) { return encode(parse_minus(f)); }

// ---------------------------------------------------------------------
// Correspondence checks
// ---------------------------------------------------------------------

struct TheoremReport {
    bool lhs = false;
    bool rhs = false;
    std::optional<std::vector<ccs::Label>> witness;  // run supporting rhs
    bool agree() const { return lhs == rhs; }
};

namespace detail {

// Shortest run from the initial graph state to a state satisfying the
// predicate; the graph is connected by construction.
template <class Pred>
inline std::optional<std::vector<ccs::Label>> run_to(const ccs::Graph& g,
                                                     Pred&& target) {
    std::vector<int> parent_edge(g.states.size(), -2);
    std::vector<std::pair<int, int>> edge_from;  // (source, label)
    std::vector<int> frontier{0};
    parent_edge[0] = -1;
    for (std::size_t scan = 0; scan < frontier.size(); ++scan) {
        int cur = frontier[scan];
        if (target(cur)) {
            std::vector<ccs::Label> labels;
            for (int at = cur; parent_edge[at] != -1;) {
                const auto& [src, lab] = edge_from[parent_edge[at]];
                labels.push_back(g.labels[lab]);
                at = src;
            }
            std::reverse(labels.begin(), labels.end());
            return labels;
        }
        for (const auto& e : g.edges[cur]) {
            if (parent_edge[e.target] != -2) continue;
            parent_edge[e.target] = static_cast<int>(edge_from.size());
            edge_from.emplace_back(cur, e.label);
            frontier.push_back(e.target);
        }
    }
    return std::nullopt;
}

inline pcl::FormulaPtr latent_goal(
    const std::set<std::pair<Ident, std::string>>& latents) {
    pcl::FormulaPtr goal;
    for (const auto& [principal, atom] : latents) {
        auto unit = pcl::f_atom(pcl::promise(atom, principal));
        goal = goal ? pcl::f_and(goal, unit) : unit;
    }
    return goal ? goal : pcl::f_true();
}

}  // namespace detail

// Logical side: the formula entails the conjunction of its latent
// actions.  Process side: the encoding can reach the empty process.
inline TheoremReport check_entail_vs_reach(const pcl::FormulaPtr& f,
                                           int state_cap = ccs::kDefaultStateCap) {
    auto clauses = parse_minus(f);
    TheoremReport rep;
    rep.lhs = pcl::pcl_entails(pcl::normalise(f),
                               detail::latent_goal(latent_actions(clauses)));
    Encoded enc = encode(clauses);
    ccs::Graph g = ccs::reachable(enc.state, enc.defs, state_cap);
    auto run = detail::run_to(
        g, [&](int s) { return g.states[s].comps.empty(); });
    rep.rhs = run.has_value();
    if (run) rep.witness = std::move(*run);
    return rep;
}

// Run-based side on the logical LTS, decided by reduction to the
// entailment above; process side: some run of the encoding reaches a
// state with every involved principal fulfilled.
inline TheoremReport check_fulfil_vs_fulfil(const pcl::FormulaPtr& f,
                                            int state_cap = ccs::kDefaultStateCap) {
    auto clauses = parse_minus(f);
    TheoremReport rep;
    rep.lhs = pcl::pcl_entails(pcl::normalise(f),
                               detail::latent_goal(latent_actions(clauses)));
    std::set<Ident> involved;
    for (const auto& c : clauses) {
        involved.insert(c.sayer);
        for (const auto& p : c.premises) involved.insert(p.sayer);
    }
    Encoded enc = encode(clauses);
    ccs::Graph g = ccs::reachable(enc.state, enc.defs, state_cap);
    auto run = detail::run_to(g, [&](int s) {
        for (const auto& principal : involved)
            if (!ccs::fulfilled(g.states[s], principal)) return false;
        return true;
    });
    rep.rhs = run.has_value();
    if (run) rep.witness = std::move(*run);
    return rep;
}

}  // namespace co2::encoding
