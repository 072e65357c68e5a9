#pragma once

/*
  Contracts-as-formulae model.

  Advertised contracts are clausal PCL formulas; fusing an agreement
  normalises each contract under its advertiser, so untagged atoms
  become obligations of the principal that spoke them.  Session state
  is the merged clause environment; a do step is the one-rule LTS that
  records the performed atom as promise and fact.
*/

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "co2/model.hpp"
#include "co2/pcl/entail.hpp"
#include "co2/pcl/formula.hpp"

namespace co2::pcl {

struct PclContext {};

struct PclModel {
    using Contract = FormulaPtr;
    using Observable = FormulaPtr;
    using Action = std::string;
    using SessionState = PclEnv;
    using Context = PclContext;

    static std::string name() { return "pcl"; }
    static int max_label_arity() { return 1; }

    static std::set<Ident> contract_vars(const Contract& c) { return free_vars(c); }
    static Contract subst_contract(const Subst& sigma, const Contract& c) {
        return apply_subst(sigma, c);
    }
    static std::set<Ident> observable_vars(const Observable& phi) {
        return free_vars(phi);
    }
    static Observable subst_observable(const Subst& sigma, const Observable& phi) {
        return apply_subst(sigma, phi);
    }

    static std::string print_contract(const Contract& c) { return to_string(c); }
    static std::string print_observable(const Observable& phi) {
        return to_string(phi);
    }
    static std::string print_action(const Action& a) { return a; }
    static std::string print_session(const SessionState& s, const Context&) {
        return to_string(s);
    }

    static Contract attribute(const Ident& principal, const Contract& c) {
        return f_says(principal, c);
    }

    static SessionState compose(const std::vector<Contract>& parts, const Context&) {
        PclEnv env;
        for (const auto& contract : parts) merge(env, normalise(contract));
        return env;
    }

    static bool entails(const SessionState& s, const Observable& phi,
                        const Context&) {
        return pcl_entails(s, phi);
    }

    static bool fulfilled(const SessionState& s, const Ident& principal,
                          const Context&) {
        return pcl_fulfilled(s, principal);
    }

    static std::string obligations(const SessionState& s, const Ident& principal,
                                   const Context&) {
        auto pending = pcl_obligations(s, principal);
        if (pending.empty()) return "none";
        std::ostringstream out;
        bool first = true;
        for (const auto& name : pending) {
            if (!first) out << ", ";
            first = false;
            out << name;
        }
        return out.str();
    }

    static std::vector<SessionState> try_label(
        const SessionState& s, const std::vector<std::pair<Ident, Action>>& label,
        const Context&) {
        if (label.size() != 1) return {};
        return {pcl_step(s, label[0].first, label[0].second)};
    }

    static bool session_less(const SessionState& a, const SessionState& b) {
        return a < b;
    }
    static bool contract_less(const Contract& a, const Contract& b) {
        return to_string(a) < to_string(b);
    }
    static bool action_less(const Action& a, const Action& b) { return a < b; }
    static bool action_eq(const Action& a, const Action& b) { return a == b; }
};

static_assert(ContractModel<PclModel>);

}  // namespace co2::pcl
