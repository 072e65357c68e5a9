#pragma once

/*
  The contract-model interface.

  The runtime is generic over the notion of contract: a model supplies
  the contract language principals advertise, the observables that
  ask/fuse prefixes test, and the session semantics that do prefixes
  drive.  A model is a stateless struct of types and static functions;
  runtime systems additionally carry one Model::Context value (shared
  definitions, empty for models that need none).

  Types
    Contract      one advertised contract, before attribution
    Observable    formula tested by ask and fuse
    Action        what a do prefix names
    SessionState  contents of an open session
    Context       shared immutable environment (e.g. named definitions)

  The runtime performs a multi-party do step by collecting the do
  offers on a session and asking try_label for every multiset of
  (principal, action) pairs up to max_label_arity participants; the
  model returns the possible successor states, empty when the label is
  not enabled.
*/

#include <concepts>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "co2/ident.hpp"

namespace co2 {

template <class M>
concept ContractModel = requires(
    const typename M::Contract& c, const typename M::Observable& phi,
    const typename M::Action& act, const typename M::SessionState& s,
    const typename M::Context& ctx, const Subst& sigma, const Ident& principal,
    const std::vector<typename M::Contract>& contracts,
    const std::vector<std::pair<Ident, typename M::Action>>& label) {
    { M::name() } -> std::convertible_to<std::string>;
    { M::max_label_arity() } -> std::convertible_to<int>;

    { M::contract_vars(c) } -> std::convertible_to<std::set<Ident>>;
    { M::subst_contract(sigma, c) } -> std::convertible_to<typename M::Contract>;
    { M::observable_vars(phi) } -> std::convertible_to<std::set<Ident>>;
    { M::subst_observable(sigma, phi) } -> std::convertible_to<typename M::Observable>;

    { M::print_contract(c) } -> std::convertible_to<std::string>;
    { M::print_observable(phi) } -> std::convertible_to<std::string>;
    { M::print_action(act) } -> std::convertible_to<std::string>;
    { M::print_session(s, ctx) } -> std::convertible_to<std::string>;

    // Advertising attributes the teller to its contract; composing a
    // fused agreement builds a session from attributed contracts.
    { M::attribute(principal, c) } -> std::convertible_to<typename M::Contract>;
    { M::compose(contracts, ctx) } -> std::convertible_to<typename M::SessionState>;
    { M::entails(s, phi, ctx) } -> std::convertible_to<bool>;
    { M::fulfilled(s, principal, ctx) } -> std::convertible_to<bool>;
    { M::obligations(s, principal, ctx) } -> std::convertible_to<std::string>;
    {
        M::try_label(s, label, ctx)
    } -> std::convertible_to<std::vector<typename M::SessionState>>;
    { M::session_less(s, s) } -> std::convertible_to<bool>;
    { M::contract_less(c, c) } -> std::convertible_to<bool>;
    { M::action_less(act, act) } -> std::convertible_to<bool>;
    { M::action_eq(act, act) } -> std::convertible_to<bool>;
};

}  // namespace co2
