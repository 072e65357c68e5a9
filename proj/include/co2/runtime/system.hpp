#pragma once

/*
  Systems of the contract calculus and their canonical form.

  S ::= 0 | A[P] | s[C] | S|S | (u)S

  Canonicalisation implements the structural congruence: parallel
  composition is flattened and sorted, delimiters are extruded to the
  top (binder names are globally unique, so extrusion cannot capture),
  unused delimiters are dropped, and dead terms are erased: a latent
  contract bound to a name, a tell of a name-bound latent, an ask
  declaring a name among its variables, and a fuse on a name are all
  garbage, erased when they stand alone as a whole summand.

  A snapshot for traces and state deduplication is the canonical form
  with session-name delimiters stripped; session names are stable and
  never renamed, so stripping loses nothing.
*/

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "co2/ident.hpp"
#include "co2/model.hpp"
#include "co2/runtime/process.hpp"

namespace co2::runtime {

// ---------------------------------------------------------------------
// Raw system terms (parser output)
// ---------------------------------------------------------------------

template <ContractModel M>
struct SystemTerm;

template <ContractModel M>
using SystemTermPtr = std::shared_ptr<const SystemTerm<M>>;

template <ContractModel M>
struct SystemTerm {
    enum class Kind { Zero, Agent, Session, Par, Delim };
    Kind kind = Kind::Zero;
    Ident name;                                       // agent, session, delimiter
    ProcessPtr<M> proc;                               // Agent
    std::optional<typename M::SessionState> session;  // Session
    std::vector<SystemTermPtr<M>> parts;              // Par
    SystemTermPtr<M> body;                            // Delim
};

template <ContractModel M>
SystemTermPtr<M> sys_zero() {
    static const SystemTermPtr<M> z = std::make_shared<SystemTerm<M>>();
    return z;
}

template <ContractModel M>
SystemTermPtr<M> sys_agent(Ident name, ProcessPtr<M> proc) {
    auto t = std::make_shared<SystemTerm<M>>();
    t->kind = SystemTerm<M>::Kind::Agent;
    t->name = std::move(name);
    t->proc = std::move(proc);
    return t;
}

template <ContractModel M>
SystemTermPtr<M> sys_session(Ident name, typename M::SessionState contents) {
    auto t = std::make_shared<SystemTerm<M>>();
    t->kind = SystemTerm<M>::Kind::Session;
    t->name = std::move(name);
    t->session = std::move(contents);
    return t;
}

template <ContractModel M>
SystemTermPtr<M> sys_par(std::vector<SystemTermPtr<M>> parts) {
    auto t = std::make_shared<SystemTerm<M>>();
    t->kind = SystemTerm<M>::Kind::Par;
    t->parts = std::move(parts);
    return t;
}

template <ContractModel M>
SystemTermPtr<M> sys_delim(Ident var, SystemTermPtr<M> body) {
    auto t = std::make_shared<SystemTerm<M>>();
    t->kind = SystemTerm<M>::Kind::Delim;
    t->name = std::move(var);
    t->body = std::move(body);
    return t;
}

// ---------------------------------------------------------------------
// Shared environment
// ---------------------------------------------------------------------

template <ContractModel M>
struct Env {
    typename M::Context model;
    ProcDefs<M> procs;
};

// ---------------------------------------------------------------------
// Canonical state
// ---------------------------------------------------------------------

template <ContractModel M>
struct SystemState {
    std::vector<Ident> delimiters;  // sorted
    std::vector<std::pair<Ident, ProcessPtr<M>>> agents;              // by name
    std::vector<std::pair<Ident, typename M::SessionState>> sessions;  // by name
};

// ---------------------------------------------------------------------
// Identifier collection
// ---------------------------------------------------------------------

template <ContractModel M>
void collect_idents(const Prefix<M>& p, std::set<Ident>& out) {
    switch (p.kind) {
        case Prefix<M>::Kind::Tau: return;
        case Prefix<M>::Kind::Do: out.insert(p.target); return;
        case Prefix<M>::Kind::Tell: {
            out.insert(p.target);
            out.insert(p.latent_var);
            auto cv = M::contract_vars(*p.contract);
            out.insert(cv.begin(), cv.end());
            return;
        }
        case Prefix<M>::Kind::Ask: {
            out.insert(p.target);
            out.insert(p.ask_vars.begin(), p.ask_vars.end());
            auto ov = M::observable_vars(*p.obs);
            out.insert(ov.begin(), ov.end());
            return;
        }
        case Prefix<M>::Kind::Fuse: {
            out.insert(p.fuse_var);
            auto ov = M::observable_vars(*p.obs);
            out.insert(ov.begin(), ov.end());
            return;
        }
    }
}

template <ContractModel M>
void collect_idents(const ProcessPtr<M>& p, std::set<Ident>& out) {
    using K = typename Process<M>::Kind;
    switch (p->kind) {
        case K::Sum:
            for (const auto& br : p->branches) {
                collect_idents<M>(br.prefix, out);
                collect_idents<M>(br.cont, out);
            }
            return;
        case K::Par:
            for (const auto& part : p->parts) collect_idents<M>(part, out);
            return;
        case K::Delim:
            out.insert(p->delim_var);
            collect_idents<M>(p->body, out);
            return;
        case K::Call:
            out.insert(p->call_args.begin(), p->call_args.end());
            return;
        case K::Latent: {
            out.insert(p->latent_var);
            auto cv = M::contract_vars(*p->latent_contract);
            out.insert(cv.begin(), cv.end());
            return;
        }
    }
}

// Every identifier in use anywhere in the state: the avoid set for
// fresh binders and fresh session names.
template <ContractModel M>
std::set<Ident> all_idents(const SystemState<M>& s) {
    std::set<Ident> out(s.delimiters.begin(), s.delimiters.end());
    for (const auto& [name, proc] : s.agents) {
        out.insert(name);
        collect_idents<M>(proc, out);
    }
    for (const auto& [name, contents] : s.sessions) out.insert(name);
    return out;
}

// ---------------------------------------------------------------------
// Process normalisation
// ---------------------------------------------------------------------

namespace detail {

// A summand standing alone is garbage when its prefix can never fire
// because a binder position holds a name.
template <ContractModel M>
bool garbage_prefix(const Prefix<M>& p) {
    switch (p.kind) {
        case Prefix<M>::Kind::Tell: return is_name(p.latent_var);
        case Prefix<M>::Kind::Ask:
            for (const auto& v : p.ask_vars)
                if (is_name(v)) return true;
            return false;
        case Prefix<M>::Kind::Fuse: return is_name(p.fuse_var);
        default: return false;
    }
}

template <ContractModel M>
ProcessPtr<M> norm_proc(const ProcessPtr<M>& p);

template <ContractModel M>
void norm_proc_into(const ProcessPtr<M>& p, std::vector<Ident>& delims,
                    std::vector<ProcessPtr<M>>& comps) {
    using K = typename Process<M>::Kind;
    switch (p->kind) {
        case K::Sum: {
            if (p->branches.empty()) return;  // unit of parallel
            if (p->branches.size() == 1 && garbage_prefix<M>(p->branches[0].prefix))
                return;
            std::vector<ProcBranch<M>> branches;
            branches.reserve(p->branches.size());
            for (const auto& br : p->branches)
                branches.push_back(ProcBranch<M>{br.prefix, norm_proc<M>(br.cont)});
            std::sort(branches.begin(), branches.end(),
                      [](const ProcBranch<M>& a, const ProcBranch<M>& b) {
                          return to_string<M>(p_sum<M>({a})) <
                                 to_string<M>(p_sum<M>({b}));
                      });
            comps.push_back(p_sum<M>(std::move(branches)));
            return;
        }
        case K::Par:
            for (const auto& part : p->parts)
                norm_proc_into<M>(part, delims, comps);
            return;
        case K::Delim:
            delims.push_back(p->delim_var);
            norm_proc_into<M>(p->body, delims, comps);
            return;
        case K::Call: comps.push_back(p);
            return;
        case K::Latent:
            if (!is_name(p->latent_var)) comps.push_back(p);
            return;
    }
}

// Canonical process: delimiters at top (sorted, used ones only), then
// a sorted parallel composition of summand/call/latent components.
template <ContractModel M>
ProcessPtr<M> norm_proc(const ProcessPtr<M>& p) {
    std::vector<Ident> delims;
    std::vector<ProcessPtr<M>> comps;
    norm_proc_into<M>(p, delims, comps);
    std::sort(comps.begin(), comps.end(),
              [](const ProcessPtr<M>& a, const ProcessPtr<M>& b) {
                  return to_string<M>(a) < to_string<M>(b);
              });
    ProcessPtr<M> body =
        comps.empty() ? p_zero<M>()
                      : (comps.size() == 1 ? comps[0] : p_par<M>(std::move(comps)));
    std::set<Ident> used;
    collect_idents<M>(body, used);
    std::sort(delims.begin(), delims.end());
    delims.erase(std::unique(delims.begin(), delims.end()), delims.end());
    for (auto it = delims.rbegin(); it != delims.rend(); ++it)
        if (used.count(*it)) body = p_delim<M>(*it, body);
    return body;
}

}  // namespace detail

// ---------------------------------------------------------------------
// System normalisation
// ---------------------------------------------------------------------

template <ContractModel M>
SystemState<M> congruence_normalise(const SystemTermPtr<M>& t) {
    SystemState<M> out;
    std::vector<std::pair<Ident, ProcessPtr<M>>> agents;
    std::vector<std::pair<Ident, typename M::SessionState>> sessions;
    std::vector<Ident> delims;

    std::vector<const SystemTerm<M>*> todo{t.get()};
    while (!todo.empty()) {
        const SystemTerm<M>* cur = todo.back();
        todo.pop_back();
        using K = typename SystemTerm<M>::Kind;
        switch (cur->kind) {
            case K::Zero: break;
            case K::Agent: {
                if (!is_principal_name(cur->name))
                    throw Error("agent name " + cur->name +
                                " is not a principal name");
                ProcessPtr<M> proc = detail::norm_proc<M>(cur->proc);
                // Extrude the process-level delimiters system-wide.
                while (proc->kind == Process<M>::Kind::Delim) {
                    delims.push_back(proc->delim_var);
                    proc = proc->body;
                }
                agents.emplace_back(cur->name, std::move(proc));
                break;
            }
            case K::Session:
                if (!is_session_name(cur->name))
                    throw Error("session name " + cur->name +
                                " is not of the form sN");
                sessions.emplace_back(cur->name, *cur->session);
                break;
            case K::Par:
                for (const auto& part : cur->parts) todo.push_back(part.get());
                break;
            case K::Delim:
                if (is_principal_name(cur->name))
                    throw Error("a principal name cannot be delimited: " +
                                cur->name);
                delims.push_back(cur->name);
                todo.push_back(cur->body.get());
                break;
        }
    }

    std::sort(agents.begin(), agents.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < agents.size(); ++i)
        if (agents[i].first == agents[i - 1].first)
            throw Error("duplicate agent " + agents[i].first);
    std::sort(sessions.begin(), sessions.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < sessions.size(); ++i)
        if (sessions[i].first == sessions[i - 1].first)
            throw Error("duplicate session " + sessions[i].first);

    // Keep a delimiter only where its identifier still occurs.
    std::set<Ident> used;
    for (const auto& [name, proc] : agents) collect_idents<M>(proc, used);
    for (const auto& [name, contents] : sessions) used.insert(name);
    std::sort(delims.begin(), delims.end());
    delims.erase(std::unique(delims.begin(), delims.end()), delims.end());
    for (const auto& d : delims)
        if (used.count(d)) out.delimiters.push_back(d);

    out.agents = std::move(agents);
    out.sessions = std::move(sessions);
    return out;
}

// Re-normalise a canonical state after a step rewrote parts of it.
template <ContractModel M>
SystemState<M> renormalise(const SystemState<M>& s) {
    std::vector<SystemTermPtr<M>> parts;
    for (const auto& [name, proc] : s.agents)
        parts.push_back(sys_agent<M>(name, proc));
    for (const auto& [name, contents] : s.sessions)
        parts.push_back(sys_session<M>(name, contents));
    SystemTermPtr<M> body = sys_par<M>(std::move(parts));
    for (auto it = s.delimiters.rbegin(); it != s.delimiters.rend(); ++it)
        body = sys_delim<M>(*it, body);
    return congruence_normalise<M>(body);
}

// Traces and deduplication use the canonical form without session-name
// delimiters.
template <ContractModel M>
SystemState<M> freeze_names(SystemState<M> s) {
    auto& d = s.delimiters;
    d.erase(std::remove_if(d.begin(), d.end(), is_session_name), d.end());
    return s;
}

template <ContractModel M>
void apply_subst_in_place(const Subst& sigma, SystemState<M>& s) {
    for (auto& [name, proc] : s.agents) proc = apply_subst<M>(sigma, proc);
    auto& d = s.delimiters;
    d.erase(std::remove_if(d.begin(), d.end(),
                           [&](const Ident& v) { return sigma.count(v) > 0; }),
            d.end());
}

// ---------------------------------------------------------------------
// Queries and printing
// ---------------------------------------------------------------------

template <ContractModel M>
std::set<Ident> free_vars(const SystemState<M>& s) {
    std::set<Ident> out;
    for (const auto& [name, proc] : s.agents) collect_free_vars<M>(proc, out);
    for (const auto& d : s.delimiters) out.erase(d);
    return out;
}

template <ContractModel M>
bool closed(const SystemState<M>& s) {
    return free_vars<M>(s).empty();
}

template <ContractModel M>
const typename M::SessionState* find_session(const SystemState<M>& s,
                                             const Ident& name) {
    for (const auto& [n, contents] : s.sessions)
        if (n == name) return &contents;
    return nullptr;
}

template <ContractModel M>
std::string to_string(const SystemState<M>& s, const Env<M>& env) {
    std::ostringstream inner;
    bool first = true;
    for (const auto& [name, proc] : s.agents) {
        if (!first) inner << " | ";
        first = false;
        inner << name << "[" << to_string<M>(proc) << "]";
    }
    for (const auto& [name, contents] : s.sessions) {
        if (!first) inner << " | ";
        first = false;
        inner << name << "[" << M::print_session(contents, env.model) << "]";
    }
    std::string body = first ? "0" : inner.str();
    std::string out;
    for (const auto& d : s.delimiters) out += "(" + d + ")";
    return out.empty() ? body : out + "(" + body + ")";
}

}  // namespace co2::runtime
