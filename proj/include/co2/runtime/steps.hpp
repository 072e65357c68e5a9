#pragma once

/*
  One-step reduction of systems.

  Rules, each consuming one summand of one agent (Do may consume one
  summand in each of several agents):

    Tau    tau.P fires silently.
    Tell1  tell A [x] c in agent A itself deposits the latent contract,
           attributed to A, alongside the continuation.
    Tell2  tell B [x] c with B another agent of the system deposits the
           attributed latent contract into B's process.
    Do     agents jointly perform contractual actions in a session; the
           candidate label is offered to the model, which returns the
           possible session evolutions.
    Ask    ask(v1,..,vn) s phi fires when the session s entails phi
           under some instantiation of the declared variables by
           principals of the system or s itself; the instantiation is
           applied to the whole system.
    Fuse   fuse x phi fires when some subset K of the broker's latent
           contracts admits an agreement: a substitution sigma mapping
           x and the latent variables of K to one fresh session name
           and the remaining free variables to principals, closing K
           and phi, such that the composition of K sigma entails
           phi sigma.  Only substitutions minimal among the admissible
           ones open a session.

  Defining equations are unfolded transparently before enumeration;
  the unfolding freshens binders deterministically from the set of
  identifiers used in the state, so equal states yield equal steps.
*/

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "co2/ident.hpp"
#include "co2/model.hpp"
#include "co2/runtime/process.hpp"
#include "co2/runtime/system.hpp"

namespace co2::runtime {

inline constexpr std::size_t kMaxLatentPool = 12;
inline constexpr std::size_t kMaxInstantiations = 100000;

template <ContractModel M>
struct StepInfo {
    std::string rule;  // Tau | Tell1 | Tell2 | Do | Ask | Fuse
    std::vector<Ident> agents;
    std::optional<Ident> session;
    std::string label;
    // Fairness descriptors: (agent, printed summand) for every summand
    // this step consumes.
    std::vector<std::pair<Ident, std::string>> fired;
    SystemState<M> next;
};

namespace detail {

template <ContractModel M>
std::vector<ProcessPtr<M>> components(const ProcessPtr<M>& p) {
    if (p->kind == Process<M>::Kind::Par) return p->parts;
    if (p->kind == Process<M>::Kind::Sum && p->branches.empty()) return {};
    return {p};
}

template <ContractModel M>
ProcessPtr<M> from_components(std::vector<ProcessPtr<M>> comps) {
    if (comps.empty()) return p_zero<M>();
    if (comps.size() == 1) return comps[0];
    return p_par<M>(std::move(comps));
}

template <ContractModel M>
std::string summand_str(const ProcBranch<M>& br) {
    return to_string<M>(p_sum<M>({br}));
}

inline std::string subst_str(const Subst& sigma) {
    std::string out = "{";
    bool first = true;
    for (const auto& [v, img] : sigma) {
        if (!first) out += ", ";
        first = false;
        out += v + " := " + img;
    }
    return out + "}";
}

// All assignments of `vars` to `values`, enumerated lexicographically.
inline std::vector<Subst> enumerate_assignments(const std::vector<Ident>& vars,
                                                const std::vector<Ident>& values) {
    if (vars.empty()) return {Subst{}};
    if (values.empty()) return {};
    double total = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        total *= static_cast<double>(values.size());
        if (total > static_cast<double>(kMaxInstantiations))
            throw BoundedError("too many variable instantiations to enumerate");
    }
    std::vector<Subst> out{Subst{}};
    for (const auto& v : vars) {
        std::vector<Subst> next;
        next.reserve(out.size() * values.size());
        for (const auto& partial : out)
            for (const auto& img : values) {
                Subst extended = partial;
                extended[v] = img;
                next.push_back(std::move(extended));
            }
        out = std::move(next);
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------
// Call resolution
// ---------------------------------------------------------------------

// Unfold defining equations exposed at top level of agent processes
// until every top-level component is a summand or a latent contract.
template <ContractModel M>
SystemState<M> resolve_calls(const SystemState<M>& s, const Env<M>& env) {
    FreshVarAllocator alloc{all_idents<M>(s)};
    SystemState<M> out = s;
    for (int rounds = 0;; ++rounds) {
        if (rounds > 1000)
            throw BoundedError("unfolding of defining equations did not settle");
        bool changed = false;
        for (auto& [name, proc] : out.agents) {
            auto comps = detail::components<M>(proc);
            bool local = false;
            for (auto& c : comps)
                if (c->kind == Process<M>::Kind::Call) {
                    c = unfold_call<M>(c, env.procs, alloc);
                    local = true;
                }
            if (local) {
                proc = detail::from_components<M>(std::move(comps));
                changed = true;
            }
        }
        if (!changed) return out;
        out = renormalise<M>(out);
    }
}

// ---------------------------------------------------------------------
// Agreement search
// ---------------------------------------------------------------------

template <ContractModel M>
struct AgreementCandidate {
    std::vector<std::size_t> chosen;  // indices into the latent pool
    Subst sigma;
    typename M::SessionState composed;
    bool minimal = false;
};

template <ContractModel M>
struct AgreementResult {
    Ident fresh_session;
    std::vector<AgreementCandidate<M>> admissible;
};

/*
  Enumerate the agreements reachable from a broker's pool of latent
  contracts.  A candidate is a subset K of the pool together with a
  substitution whose domain is exactly the fuse variable, the latent
  variables of K, and the free variables of the chosen contracts and of
  the observable; session-sorted variables all map to one fresh session
  name, the others range over the principals of the system.  Admissible
  candidates satisfy compose(K sigma) |= phi sigma; the minimal ones
  (no admissible substitution strictly below, comparing domains) are
  the agreements that a fuse may act on.
*/
template <ContractModel M>
AgreementResult<M> agreement_search(
    const std::vector<std::pair<Ident, typename M::Contract>>& pool,
    const std::vector<Ident>& principals, const std::set<Ident>& avoid,
    const Ident& fuse_var, const typename M::Observable& obs,
    const Env<M>& env) {
    if (pool.size() > kMaxLatentPool)
        throw BoundedError("latent contract pool exceeds " +
                           std::to_string(kMaxLatentPool) + " entries");
    AgreementResult<M> res;
    res.fresh_session = fresh_session_name(avoid);
    const Ident& s = res.fresh_session;

    std::set<Ident> phi_vars = M::observable_vars(obs);
    for (std::size_t mask = 0; mask < (std::size_t{1} << pool.size()); ++mask) {
        std::vector<std::size_t> chosen;
        std::set<Ident> session_vars{fuse_var};
        std::set<Ident> principal_vars = phi_vars;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (mask & (std::size_t{1} << i)) {
                chosen.push_back(i);
                session_vars.insert(pool[i].first);
                auto cv = M::contract_vars(pool[i].second);
                principal_vars.insert(cv.begin(), cv.end());
            }
        bool clash = false;
        for (const auto& v : session_vars)
            if (principal_vars.count(v)) {
                if (phi_vars.count(v) ||
                    std::any_of(chosen.begin(), chosen.end(),
                                [&](std::size_t i) {
                                    return M::contract_vars(pool[i].second)
                                        .count(v);
                                }))
                    throw Error("variable " + v +
                                " is used at both session and principal sort");
                clash = true;
            }
        if (clash) continue;
        for (const auto& v : session_vars) principal_vars.erase(v);

        std::vector<Ident> pvars(principal_vars.begin(), principal_vars.end());
        for (const auto& sigma_p :
             detail::enumerate_assignments(pvars, principals)) {
            Subst sigma = sigma_p;
            for (const auto& v : session_vars) sigma[v] = s;
            std::vector<typename M::Contract> contracts;
            contracts.reserve(chosen.size());
            for (std::size_t i : chosen)
                contracts.push_back(M::subst_contract(sigma, pool[i].second));
            auto composed = M::compose(contracts, env.model);
            auto goal = M::subst_observable(sigma, obs);
            if (!M::observable_vars(goal).empty()) continue;
            if (M::entails(composed, goal, env.model))
                res.admissible.push_back(AgreementCandidate<M>{
                    chosen, std::move(sigma), std::move(composed), false});
        }
    }

    for (auto& cand : res.admissible) {
        cand.minimal = std::none_of(
            res.admissible.begin(), res.admissible.end(),
            [&](const AgreementCandidate<M>& other) {
                return strict_sub_subst(other.sigma, cand.sigma);
            });
    }
    return res;
}

// ---------------------------------------------------------------------
// Step enumeration
// ---------------------------------------------------------------------

template <ContractModel M>
std::vector<StepInfo<M>> enumerate_steps(const SystemState<M>& state,
                                         const Env<M>& env) {
    if (!closed<M>(state)) {
        std::string vars;
        for (const auto& v : free_vars<M>(state))
            vars += (vars.empty() ? "" : ", ") + v;
        throw Error("cannot run an open system; free variables: " + vars);
    }
    SystemState<M> r = resolve_calls<M>(state, env);

    std::vector<Ident> principals;
    std::vector<std::vector<ProcessPtr<M>>> comps;
    principals.reserve(r.agents.size());
    comps.reserve(r.agents.size());
    for (const auto& [name, proc] : r.agents) {
        principals.push_back(name);
        comps.push_back(detail::components<M>(proc));
    }

    auto successor = [&](std::vector<std::vector<ProcessPtr<M>>> agent_comps,
                         std::vector<std::pair<Ident, typename M::SessionState>>
                             sessions,
                         const Subst& sigma) {
        SystemState<M> n;
        n.delimiters = r.delimiters;
        for (std::size_t i = 0; i < r.agents.size(); ++i)
            n.agents.emplace_back(
                r.agents[i].first,
                detail::from_components<M>(std::move(agent_comps[i])));
        n.sessions = std::move(sessions);
        if (!sigma.empty()) apply_subst_in_place<M>(sigma, n);
        return freeze_names<M>(renormalise<M>(n));
    };

    std::vector<StepInfo<M>> out;

    // Solo rules: one summand of one agent.
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const Ident& self = principals[i];
        for (std::size_t j = 0; j < comps[i].size(); ++j) {
            const auto& comp = comps[i][j];
            if (comp->kind != Process<M>::Kind::Sum) continue;
            for (const auto& br : comp->branches) {
                const Prefix<M>& pre = br.prefix;
                switch (pre.kind) {
                    case Prefix<M>::Kind::Tau: {
                        auto mod = comps;
                        mod[i][j] = br.cont;
                        out.push_back(StepInfo<M>{
                            "Tau",
                            {self},
                            std::nullopt,
                            "tau",
                            {{self, detail::summand_str<M>(br)}},
                            successor(std::move(mod), r.sessions, {})});
                        break;
                    }
                    case Prefix<M>::Kind::Tell: {
                        if (is_name(pre.latent_var)) break;
                        auto latent = p_latent<M>(
                            pre.latent_var, M::attribute(self, *pre.contract));
                        auto mod = comps;
                        if (pre.target == self) {
                            mod[i][j] = p_par<M>({br.cont, latent});
                        } else {
                            auto it = std::find(principals.begin(),
                                                principals.end(), pre.target);
                            if (it == principals.end()) break;
                            mod[i][j] = br.cont;
                            mod[it - principals.begin()].push_back(latent);
                        }
                        out.push_back(StepInfo<M>{
                            pre.target == self ? "Tell1" : "Tell2",
                            {self},
                            std::nullopt,
                            to_string<M>(pre),
                            {{self, detail::summand_str<M>(br)}},
                            successor(std::move(mod), r.sessions, {})});
                        break;
                    }
                    case Prefix<M>::Kind::Ask: {
                        if (!is_session_name(pre.target)) break;
                        const auto* session =
                            find_session<M>(r, pre.target);
                        if (!session) break;
                        if (std::any_of(pre.ask_vars.begin(),
                                        pre.ask_vars.end(), is_name))
                            break;
                        std::vector<Ident> values = principals;
                        values.push_back(pre.target);
                        for (const auto& sigma : detail::enumerate_assignments(
                                 pre.ask_vars, values)) {
                            auto goal = M::subst_observable(sigma, *pre.obs);
                            if (!M::observable_vars(goal).empty()) continue;
                            if (!M::entails(*session, goal, env.model))
                                continue;
                            auto mod = comps;
                            mod[i][j] = br.cont;
                            std::string label = to_string<M>(pre);
                            if (!sigma.empty())
                                label += " with " + detail::subst_str(sigma);
                            out.push_back(StepInfo<M>{
                                "Ask",
                                {self},
                                pre.target,
                                std::move(label),
                                {{self, detail::summand_str<M>(br)}},
                                successor(std::move(mod), r.sessions, sigma)});
                        }
                        break;
                    }
                    case Prefix<M>::Kind::Fuse: {
                        if (is_name(pre.fuse_var)) break;
                        std::vector<std::pair<Ident, typename M::Contract>>
                            pool;
                        std::vector<std::size_t> pool_comp;
                        for (std::size_t k = 0; k < comps[i].size(); ++k)
                            if (comps[i][k]->kind ==
                                Process<M>::Kind::Latent) {
                                pool.emplace_back(
                                    comps[i][k]->latent_var,
                                    *comps[i][k]->latent_contract);
                                pool_comp.push_back(k);
                            }
                        auto agreements = agreement_search<M>(
                            pool, principals, all_idents<M>(r), pre.fuse_var,
                            *pre.obs, env);
                        for (const auto& cand : agreements.admissible) {
                            if (!cand.minimal) continue;
                            auto mod = comps;
                            mod[i][j] = br.cont;
                            std::vector<std::size_t> doomed;
                            for (std::size_t p : cand.chosen)
                                doomed.push_back(pool_comp[p]);
                            std::sort(doomed.rbegin(), doomed.rend());
                            for (std::size_t k : doomed)
                                mod[i].erase(mod[i].begin() +
                                             static_cast<std::ptrdiff_t>(k));
                            auto sessions = r.sessions;
                            sessions.emplace_back(agreements.fresh_session,
                                                  cand.composed);
                            out.push_back(StepInfo<M>{
                                "Fuse",
                                {self},
                                agreements.fresh_session,
                                to_string<M>(pre) + " -> " +
                                    agreements.fresh_session + " with " +
                                    detail::subst_str(cand.sigma),
                                {{self, detail::summand_str<M>(br)}},
                                successor(std::move(mod), std::move(sessions),
                                          cand.sigma)});
                        }
                        break;
                    }
                    case Prefix<M>::Kind::Do:
                        break;  // handled per session below
                }
            }
        }
    }

    // Do: one summand in each of up to max_label_arity distinct agents,
    // all acting on the same session.
    for (std::size_t si = 0; si < r.sessions.size(); ++si) {
        const Ident& s = r.sessions[si].first;
        struct Choice {
            std::size_t comp;
            const ProcBranch<M>* branch;
        };
        std::vector<std::pair<std::size_t, std::vector<Choice>>> offers;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            std::vector<Choice> mine;
            for (std::size_t j = 0; j < comps[i].size(); ++j) {
                if (comps[i][j]->kind != Process<M>::Kind::Sum) continue;
                for (const auto& br : comps[i][j]->branches)
                    if (br.prefix.kind == Prefix<M>::Kind::Do &&
                        br.prefix.target == s)
                        mine.push_back(Choice{j, &br});
            }
            if (!mine.empty()) offers.emplace_back(i, std::move(mine));
        }

        std::vector<std::size_t> picked;
        auto attempt = [&](const std::vector<std::size_t>& sel) {
            std::vector<std::vector<Choice>> pools;
            for (std::size_t o : sel) pools.push_back(offers[o].second);
            std::vector<std::size_t> idx(sel.size(), 0);
            while (true) {
                std::vector<std::pair<Ident, typename M::Action>> wanted;
                for (std::size_t k = 0; k < sel.size(); ++k)
                    wanted.emplace_back(
                        principals[offers[sel[k]].first],
                        *pools[k][idx[k]].branch->prefix.action);
                for (const auto& ss :
                     M::try_label(r.sessions[si].second, wanted, env.model)) {
                    auto mod = comps;
                    std::vector<Ident> agents;
                    std::vector<std::pair<Ident, std::string>> fired;
                    std::string label;
                    for (std::size_t k = 0; k < sel.size(); ++k) {
                        std::size_t i = offers[sel[k]].first;
                        const Choice& ch = pools[k][idx[k]];
                        mod[i][ch.comp] = ch.branch->cont;
                        agents.push_back(principals[i]);
                        fired.emplace_back(
                            principals[i],
                            detail::summand_str<M>(*ch.branch));
                        if (!label.empty()) label += " & ";
                        label += principals[i] + " do " + s + " " +
                                 M::print_action(
                                     *ch.branch->prefix.action);
                    }
                    auto sessions = r.sessions;
                    sessions[si].second = ss;
                    out.push_back(StepInfo<M>{
                        "Do", std::move(agents), s, std::move(label),
                        std::move(fired),
                        successor(std::move(mod), std::move(sessions), {})});
                }
                std::size_t k = 0;
                for (; k < idx.size(); ++k) {
                    if (++idx[k] < pools[k].size()) break;
                    idx[k] = 0;
                }
                if (k == idx.size()) break;
            }
        };
        auto combos = [&](auto&& rec, std::size_t start) -> void {
            if (!picked.empty() &&
                picked.size() <= static_cast<std::size_t>(M::max_label_arity()))
                attempt(picked);
            if (picked.size() >=
                static_cast<std::size_t>(M::max_label_arity()))
                return;
            for (std::size_t o = start; o < offers.size(); ++o) {
                picked.push_back(o);
                rec(rec, o + 1);
                picked.pop_back();
            }
        };
        combos(combos, 0);
    }

    return out;
}

}  // namespace co2::runtime
