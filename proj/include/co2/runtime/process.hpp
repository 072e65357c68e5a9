#pragma once

/*
  Processes of the contract calculus, generic over the contract model.

  P ::= 0 | [u] c | sum of pi.P | P|P | (u)P | X(args)
  pi ::= tau | do u a | tell B [x] c | ask(vars) u phi | fuse x phi

  The ask variable list declares which delimited variables the firing
  substitution covers; it binds nothing by itself.  Only (u) binds, and
  the parser keeps binder names globally unique, so substitution never
  needs capture-avoiding renaming; unfolding a defining equation
  freshens the binders of the copied body instead.
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

namespace co2::runtime {

template <ContractModel M>
struct Process;

template <ContractModel M>
using ProcessPtr = std::shared_ptr<const Process<M>>;

template <ContractModel M>
struct Prefix {
    enum class Kind { Tau, Do, Tell, Ask, Fuse };
    Kind kind = Kind::Tau;
    Ident target;                                  // Do/Ask session, Tell recipient
    std::optional<typename M::Action> action;      // Do
    Ident latent_var;                              // Tell
    std::optional<typename M::Contract> contract;  // Tell
    std::vector<Ident> ask_vars;                   // Ask
    std::optional<typename M::Observable> obs;     // Ask/Fuse
    Ident fuse_var;                                // Fuse
};

template <ContractModel M>
struct ProcBranch {
    Prefix<M> prefix;
    ProcessPtr<M> cont;
};

template <ContractModel M>
struct Process {
    enum class Kind { Sum, Par, Delim, Call, Latent };
    Kind kind = Kind::Sum;
    std::vector<ProcBranch<M>> branches;             // Sum; empty means 0
    std::vector<ProcessPtr<M>> parts;                // Par
    Ident delim_var;                                 // Delim
    ProcessPtr<M> body;                              // Delim
    std::string call_name;                           // Call
    std::vector<Ident> call_args;                    // Call
    Ident latent_var;                                // Latent
    std::optional<typename M::Contract> latent_contract;  // Latent
};

// ---------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------

template <ContractModel M>
ProcessPtr<M> p_zero() {
    static const ProcessPtr<M> z = std::make_shared<Process<M>>();
    return z;
}

template <ContractModel M>
ProcessPtr<M> p_sum(std::vector<ProcBranch<M>> branches) {
    auto p = std::make_shared<Process<M>>();
    p->kind = Process<M>::Kind::Sum;
    p->branches = std::move(branches);
    return p;
}

template <ContractModel M>
ProcessPtr<M> p_prefixed(Prefix<M> pre, ProcessPtr<M> cont) {
    return p_sum<M>({ProcBranch<M>{std::move(pre), std::move(cont)}});
}

template <ContractModel M>
ProcessPtr<M> p_par(std::vector<ProcessPtr<M>> parts) {
    auto p = std::make_shared<Process<M>>();
    p->kind = Process<M>::Kind::Par;
    p->parts = std::move(parts);
    return p;
}

template <ContractModel M>
ProcessPtr<M> p_delim(Ident var, ProcessPtr<M> body) {
    auto p = std::make_shared<Process<M>>();
    p->kind = Process<M>::Kind::Delim;
    p->delim_var = std::move(var);
    p->body = std::move(body);
    return p;
}

template <ContractModel M>
ProcessPtr<M> p_call(std::string name, std::vector<Ident> args) {
    auto p = std::make_shared<Process<M>>();
    p->kind = Process<M>::Kind::Call;
    p->call_name = std::move(name);
    p->call_args = std::move(args);
    return p;
}

template <ContractModel M>
ProcessPtr<M> p_latent(Ident var, typename M::Contract contract) {
    auto p = std::make_shared<Process<M>>();
    p->kind = Process<M>::Kind::Latent;
    p->latent_var = std::move(var);
    p->latent_contract = std::move(contract);
    return p;
}

template <ContractModel M>
Prefix<M> pre_tau() {
    return Prefix<M>{};
}

template <ContractModel M>
Prefix<M> pre_do(Ident session, typename M::Action action) {
    Prefix<M> p;
    p.kind = Prefix<M>::Kind::Do;
    p.target = std::move(session);
    p.action = std::move(action);
    return p;
}

template <ContractModel M>
Prefix<M> pre_tell(Ident recipient, Ident var, typename M::Contract contract) {
    Prefix<M> p;
    p.kind = Prefix<M>::Kind::Tell;
    p.target = std::move(recipient);
    p.latent_var = std::move(var);
    p.contract = std::move(contract);
    return p;
}

template <ContractModel M>
Prefix<M> pre_ask(Ident session, std::vector<Ident> vars,
                  typename M::Observable obs) {
    Prefix<M> p;
    p.kind = Prefix<M>::Kind::Ask;
    p.target = std::move(session);
    p.ask_vars = std::move(vars);
    p.obs = std::move(obs);
    return p;
}

template <ContractModel M>
Prefix<M> pre_fuse(Ident var, typename M::Observable obs) {
    Prefix<M> p;
    p.kind = Prefix<M>::Kind::Fuse;
    p.fuse_var = std::move(var);
    p.obs = std::move(obs);
    return p;
}

// ---------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------

namespace detail {
// An observable is shown bare only when it prints as one token.
inline bool single_token(const std::string& s) {
    return s.find(' ') == std::string::npos && s.find('(') == std::string::npos;
}
}  // namespace detail

template <ContractModel M>
std::string to_string(const Prefix<M>& p) {
    switch (p.kind) {
        case Prefix<M>::Kind::Tau: return "tau";
        case Prefix<M>::Kind::Do:
            return "do " + p.target + " " + M::print_action(*p.action);
        case Prefix<M>::Kind::Tell:
            return "tell " + p.target + " [" + p.latent_var + "] (" +
                   M::print_contract(*p.contract) + ")";
        case Prefix<M>::Kind::Ask: {
            std::string head = "ask";
            if (!p.ask_vars.empty()) {
                head += "(";
                for (std::size_t i = 0; i < p.ask_vars.size(); ++i)
                    head += (i ? "," : "") + p.ask_vars[i];
                head += ")";
            }
            std::string phi = M::print_observable(*p.obs);
            if (!detail::single_token(phi)) phi = "(" + phi + ")";
            return head + " " + p.target + " " + phi;
        }
        case Prefix<M>::Kind::Fuse: {
            std::string phi = M::print_observable(*p.obs);
            if (!detail::single_token(phi)) phi = "(" + phi + ")";
            return "fuse " + p.fuse_var + " " + phi;
        }
    }
    return "";
}

// Precedence: prefixing over +, + over |; delimiters self-bracket.
template <ContractModel M>
std::string to_string(const ProcessPtr<M>& p) {
    using K = typename Process<M>::Kind;
    switch (p->kind) {
        case K::Sum: {
            if (p->branches.empty()) return "0";
            std::ostringstream out;
            for (std::size_t i = 0; i < p->branches.size(); ++i) {
                if (i) out << " + ";
                const auto& br = p->branches[i];
                out << to_string<M>(br.prefix) << ".";
                const auto& cont = br.cont;
                bool inline_cont =
                    (cont->kind == K::Sum && cont->branches.size() <= 1) ||
                    cont->kind == K::Call;
                if (inline_cont)
                    out << to_string<M>(cont);
                else
                    out << "(" << to_string<M>(cont) << ")";
            }
            return out.str();
        }
        case K::Par: {
            if (p->parts.empty()) return "0";
            std::ostringstream out;
            for (std::size_t i = 0; i < p->parts.size(); ++i) {
                if (i) out << " | ";
                out << to_string<M>(p->parts[i]);
            }
            return out.str();
        }
        case K::Delim:
            return "(" + p->delim_var + ")(" + to_string<M>(p->body) + ")";
        case K::Call: {
            if (p->call_args.empty()) return p->call_name;
            std::string out = p->call_name + "(";
            for (std::size_t i = 0; i < p->call_args.size(); ++i)
                out += (i ? "," : "") + p->call_args[i];
            return out + ")";
        }
        case K::Latent:
            return "[" + p->latent_var + "] (" +
                   M::print_contract(*p->latent_contract) + ")";
    }
    return "";
}

// ---------------------------------------------------------------------
// Free variables and substitution
// ---------------------------------------------------------------------

template <ContractModel M>
void collect_free_vars(const Prefix<M>& p, std::set<Ident>& out) {
    auto add = [&](const Ident& id) {
        if (is_variable(id)) out.insert(id);
    };
    switch (p.kind) {
        case Prefix<M>::Kind::Tau: return;
        case Prefix<M>::Kind::Do: add(p.target); return;
        case Prefix<M>::Kind::Tell: {
            add(p.target);
            add(p.latent_var);
            auto cv = M::contract_vars(*p.contract);
            out.insert(cv.begin(), cv.end());
            return;
        }
        case Prefix<M>::Kind::Ask: {
            add(p.target);
            for (const auto& v : p.ask_vars) add(v);
            auto ov = M::observable_vars(*p.obs);
            out.insert(ov.begin(), ov.end());
            return;
        }
        case Prefix<M>::Kind::Fuse: {
            add(p.fuse_var);
            auto ov = M::observable_vars(*p.obs);
            out.insert(ov.begin(), ov.end());
            return;
        }
    }
}

template <ContractModel M>
void collect_free_vars(const ProcessPtr<M>& p, std::set<Ident>& out) {
    using K = typename Process<M>::Kind;
    switch (p->kind) {
        case K::Sum:
            for (const auto& br : p->branches) {
                collect_free_vars<M>(br.prefix, out);
                collect_free_vars<M>(br.cont, out);
            }
            return;
        case K::Par:
            for (const auto& part : p->parts) collect_free_vars<M>(part, out);
            return;
        case K::Delim: {
            std::set<Ident> inner;
            collect_free_vars<M>(p->body, inner);
            inner.erase(p->delim_var);
            out.insert(inner.begin(), inner.end());
            return;
        }
        case K::Call:
            for (const auto& a : p->call_args)
                if (is_variable(a)) out.insert(a);
            return;
        case K::Latent: {
            if (is_variable(p->latent_var)) out.insert(p->latent_var);
            auto cv = M::contract_vars(*p->latent_contract);
            out.insert(cv.begin(), cv.end());
            return;
        }
    }
}

template <ContractModel M>
std::set<Ident> free_vars(const ProcessPtr<M>& p) {
    std::set<Ident> out;
    collect_free_vars<M>(p, out);
    return out;
}

template <ContractModel M>
Prefix<M> apply_subst(const Subst& sigma, const Prefix<M>& p) {
    Prefix<M> out = p;
    out.target = co2::apply_subst(sigma, p.target);
    out.latent_var = co2::apply_subst(sigma, p.latent_var);
    out.fuse_var = co2::apply_subst(sigma, p.fuse_var);
    for (auto& v : out.ask_vars) v = co2::apply_subst(sigma, v);
    if (out.contract) out.contract = M::subst_contract(sigma, *out.contract);
    if (out.obs) out.obs = M::subst_observable(sigma, *out.obs);
    return out;
}

template <ContractModel M>
ProcessPtr<M> apply_subst(const Subst& sigma, const ProcessPtr<M>& p) {
    using K = typename Process<M>::Kind;
    if (sigma.empty()) return p;
    switch (p->kind) {
        case K::Sum: {
            if (p->branches.empty()) return p;
            std::vector<ProcBranch<M>> branches;
            branches.reserve(p->branches.size());
            for (const auto& br : p->branches)
                branches.push_back(ProcBranch<M>{apply_subst<M>(sigma, br.prefix),
                                                 apply_subst<M>(sigma, br.cont)});
            return p_sum<M>(std::move(branches));
        }
        case K::Par: {
            std::vector<ProcessPtr<M>> parts;
            parts.reserve(p->parts.size());
            for (const auto& part : p->parts)
                parts.push_back(apply_subst<M>(sigma, part));
            return p_par<M>(std::move(parts));
        }
        case K::Delim:
            if (sigma.count(p->delim_var))
                throw Error("substitution would capture binder " + p->delim_var);
            return p_delim<M>(p->delim_var, apply_subst<M>(sigma, p->body));
        case K::Call: {
            std::vector<Ident> args;
            args.reserve(p->call_args.size());
            for (const auto& a : p->call_args)
                args.push_back(co2::apply_subst(sigma, a));
            return p_call<M>(p->call_name, std::move(args));
        }
        case K::Latent:
            return p_latent<M>(co2::apply_subst(sigma, p->latent_var),
                               M::subst_contract(sigma, *p->latent_contract));
    }
    return p;
}

// ---------------------------------------------------------------------
// Defining equations
// ---------------------------------------------------------------------

template <ContractModel M>
struct ProcEq {
    std::vector<Ident> params;
    ProcessPtr<M> body;
};

template <ContractModel M>
using ProcDefs = std::map<std::string, ProcEq<M>>;

// Rename every binder of the copied body deterministically, then bind
// the parameters to the call arguments.
template <ContractModel M>
ProcessPtr<M> freshen_binders(const ProcessPtr<M>& p, FreshVarAllocator& alloc,
                              Subst& renaming) {
    using K = typename Process<M>::Kind;
    switch (p->kind) {
        case K::Sum: {
            if (p->branches.empty()) return p;
            std::vector<ProcBranch<M>> branches;
            branches.reserve(p->branches.size());
            for (const auto& br : p->branches)
                branches.push_back(
                    ProcBranch<M>{apply_subst<M>(renaming, br.prefix),
                                  freshen_binders<M>(br.cont, alloc, renaming)});
            return p_sum<M>(std::move(branches));
        }
        case K::Par: {
            std::vector<ProcessPtr<M>> parts;
            parts.reserve(p->parts.size());
            for (const auto& part : p->parts)
                parts.push_back(freshen_binders<M>(part, alloc, renaming));
            return p_par<M>(std::move(parts));
        }
        case K::Delim: {
            Ident fresh = alloc.next(p->delim_var);
            Subst inner = renaming;
            inner[p->delim_var] = fresh;
            return p_delim<M>(fresh, freshen_binders<M>(p->body, alloc, inner));
        }
        case K::Call:
        case K::Latent: return apply_subst<M>(renaming, p);
    }
    return p;
}

template <ContractModel M>
ProcessPtr<M> unfold_call(const ProcessPtr<M>& call, const ProcDefs<M>& defs,
                          FreshVarAllocator& alloc) {
    auto it = defs.find(call->call_name);
    if (it == defs.end())
        throw Error("undefined process identifier " + call->call_name);
    const ProcEq<M>& eq = it->second;
    if (eq.params.size() != call->call_args.size())
        throw Error("process " + call->call_name + " expects " +
                    std::to_string(eq.params.size()) + " arguments, got " +
                    std::to_string(call->call_args.size()));
    Subst renaming;
    ProcessPtr<M> body = freshen_binders<M>(eq.body, alloc, renaming);
    Subst bind;
    for (std::size_t i = 0; i < eq.params.size(); ++i)
        bind[eq.params[i]] = call->call_args[i];
    return apply_subst<M>(bind, body);
}

// Defining equations must be prefix-guarded: following unguarded call
// positions never loops, and free variables are covered by parameters.
template <ContractModel M>
void validate_proc_defs(const ProcDefs<M>& defs) {
    for (const auto& [name, eq] : defs) {
        std::set<Ident> fv = free_vars<M>(eq.body);
        for (const auto& param : eq.params) fv.erase(param);
        if (!fv.empty())
            throw Error("process " + name + " has unbound variable " + *fv.begin());
    }
    // Edges of the unguarded-call graph: calls not under any prefix.
    std::map<std::string, std::set<std::string>> unguarded;
    for (const auto& [name, eq] : defs) {
        std::vector<const Process<M>*> todo{eq.body.get()};
        while (!todo.empty()) {
            const Process<M>* p = todo.back();
            todo.pop_back();
            using K = typename Process<M>::Kind;
            switch (p->kind) {
                case K::Sum: break;  // everything below is guarded
                case K::Par:
                    for (const auto& part : p->parts) todo.push_back(part.get());
                    break;
                case K::Delim: todo.push_back(p->body.get()); break;
                case K::Latent: break;
                case K::Call:
                    if (!defs.count(p->call_name))
                        throw Error("undefined process identifier " + p->call_name);
                    unguarded[name].insert(p->call_name);
                    break;
            }
        }
    }
    std::map<std::string, int> colour;  // 0 new, 1 on path, 2 done
    struct Walk {
        const std::map<std::string, std::set<std::string>>& edges;
        std::map<std::string, int>& colour;
        void visit(const std::string& name) {
            colour[name] = 1;
            auto it = edges.find(name);
            if (it != edges.end())
                for (const auto& next : it->second) {
                    if (colour[next] == 1)
                        throw Error("process " + next +
                                    " is not prefix-guarded (unguarded recursion)");
                    if (colour[next] == 0) visit(next);
                }
            colour[name] = 2;
        }
    } walk{unguarded, colour};
    for (const auto& [name, eq] : defs)
        if (colour[name] == 0) walk.visit(name);
}

}  // namespace co2::runtime
