#pragma once

/*
  Contracts-as-processes model.

  An advertised contract is kept in canonical form: a multiset of
  components, each a says-tagged sum of action-prefixed continuations
  or a reference to a named recursive definition.  Session state is the
  same canonical form for the parallel composition of the fused
  contracts.  A do step consumes one transition of the session whose
  label attributes every action to the principal that performs it;
  synchronisations therefore need both sides to act in the same step.
*/

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "co2/ccs/contract.hpp"
#include "co2/ccs/ltl.hpp"
#include "co2/ccs/step.hpp"
#include "co2/model.hpp"

namespace co2::ccs {

struct CcsContext {
    Defs defs;
    int state_cap = kDefaultStateCap;
};

struct CcsModel {
    using Contract = State;
    using Observable = LtlPtr;
    using Action = Atom;
    using SessionState = State;
    using Context = CcsContext;

    static std::string name() { return "ccs"; }
    static int max_label_arity() { return 2; }

    static std::set<Ident> contract_vars(const Contract& c) { return free_vars(c); }
    static Contract subst_contract(const Subst& sigma, const Contract& c) {
        return apply_subst(sigma, c);
    }
    static std::set<Ident> observable_vars(const Observable&) { return {}; }
    static Observable subst_observable(const Subst&, const Observable& phi) {
        return phi;
    }

    static std::string print_contract(const Contract& c) { return to_string(c); }
    static std::string print_observable(const Observable& phi) {
        return to_string(phi);
    }
    static std::string print_action(const Action& a) { return a.str(); }
    static std::string print_session(const SessionState& s, const Context&) {
        return to_string(s);
    }

    static Contract attribute(const Ident& principal, const Contract& c) {
        return ccs::attribute(principal, c);
    }

    static SessionState compose(const std::vector<Contract>& parts, const Context&) {
        State out;
        for (const auto& contract : parts)
            out.comps.insert(out.comps.end(), contract.comps.begin(),
                             contract.comps.end());
        sort_components(out.comps);
        return out;
    }

    static bool entails(const SessionState& s, const Observable& phi,
                        const Context& ctx) {
        return ccs::entails(s, ctx.defs, phi, ctx.state_cap);
    }

    static bool fulfilled(const SessionState& s, const Ident& principal,
                          const Context&) {
        return ccs::fulfilled(s, principal);
    }

    static std::string obligations(const SessionState& s, const Ident& principal,
                                   const Context&) {
        std::ostringstream out;
        bool first = true;
        for (const auto& comp : s.comps) {
            if (comp.sayers.empty() || comp.sayers.front() != principal) continue;
            if (!first) out << " | ";
            first = false;
            out << to_string(comp);
        }
        return first ? "none" : out.str();
    }

    // Participants a transition attributes actions to.  Bare components
    // act for nobody, so their transitions can never be driven by do.
    static std::vector<std::pair<Ident, Action>> participants(const Label& l) {
        switch (l.kind) {
            case Label::Kind::Bare: return {};
            case Label::Kind::Auto: return {{l.principal, l.atom}};
            case Label::Kind::Sync:
                return {{l.principal, Atom{l.atom.name, Polarity::Input}},
                        {l.partner, Atom{l.atom.name, Polarity::Output}}};
        }
        return {};
    }

    static std::vector<SessionState> try_label(
        const SessionState& s, const std::vector<std::pair<Ident, Action>>& label,
        const Context& ctx) {
        std::vector<std::pair<Ident, Action>> wanted = label;
        std::sort(wanted.begin(), wanted.end());
        std::vector<SessionState> out;
        for (const auto& [l, succ] : step(s, ctx.defs)) {
            auto ps = participants(l);
            if (ps.empty()) continue;
            std::sort(ps.begin(), ps.end());
            if (ps != wanted) continue;
            if (std::find(out.begin(), out.end(), succ) == out.end())
                out.push_back(succ);
        }
        return out;
    }

    static bool session_less(const SessionState& a, const SessionState& b) {
        return a < b;
    }
    static bool contract_less(const Contract& a, const Contract& b) { return a < b; }
    static bool action_less(const Action& a, const Action& b) { return a < b; }
    static bool action_eq(const Action& a, const Action& b) { return a == b; }
};

static_assert(ContractModel<CcsModel>);

}  // namespace co2::ccs
