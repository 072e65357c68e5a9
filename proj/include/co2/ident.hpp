#pragma once

/*
  Identifiers, sorts, substitutions and the deterministic fresh-name
  allocator shared by every layer of the kernel.

  Identifier sorts are purely syntactic:
    - principal names start with an uppercase letter (A, B, E, A1);
    - session names are `s` followed by digits (s1, s2, ...), and are
      only ever minted by the allocator;
    - everything else is a variable (session variables x, y, z and
      principal variables a, b by convention, told apart by use site).

  Sessions are never alpha-renamed. A fresh session name is always the
  lowest-indexed sN not present in the running system, so the same
  session keeps its name at every point of a trace and across the
  interleavings explored by the checkers.
*/

#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace co2 {

using Ident = std::string;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a state-space or enumeration cap is hit; callers must not
// silently truncate.
struct BoundedError : Error {
    using Error::Error;
};

inline bool is_principal_name(const Ident& id) {
    return !id.empty() && std::isupper(static_cast<unsigned char>(id[0]));
}

inline bool is_session_name(const Ident& id) {
    if (id.size() < 2 || id[0] != 's') return false;
    for (std::size_t i = 1; i < id.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
    return true;
}

inline bool is_name(const Ident& id) {
    return is_principal_name(id) || is_session_name(id);
}

inline bool is_variable(const Ident& id) { return !id.empty() && !is_name(id); }

// A finite substitution of variables by identifiers (names, in every use
// the reduction rules make of it).
using Subst = std::map<Ident, Ident>;

inline Ident apply_subst(const Subst& sigma, const Ident& id) {
    auto it = sigma.find(id);
    return it == sigma.end() ? id : it->second;
}

// True iff sub is a strict sub-substitution of super: strictly smaller
// domain, agreeing on the shared variables.
inline bool strict_sub_subst(const Subst& sub, const Subst& super) {
    if (sub.size() >= super.size()) return false;
    for (const auto& [v, n] : sub) {
        auto it = super.find(v);
        if (it == super.end() || it->second != n) return false;
    }
    return true;
}

// Lowest-indexed session name not in the universe.
inline Ident fresh_session_name(const std::set<Ident>& universe) {
    for (int i = 1;; ++i) {
        Ident candidate = "s" + std::to_string(i);
        if (!universe.count(candidate)) return candidate;
    }
}

// Deterministic renaming source for binders duplicated by unfolding
// recursive process definitions. Produces x#1, x#2, ... skipping names
// already used, so the result depends only on the avoid set and the
// call sequence, never on global state.
class FreshVarAllocator {
  public:
    FreshVarAllocator() = default;
    explicit FreshVarAllocator(std::set<Ident> used) : used_(std::move(used)) {}

    Ident next(const Ident& base) {
        int& n = counters_[base];
        while (true) {
            Ident candidate = base + "#" + std::to_string(++n);
            if (used_.insert(candidate).second) return candidate;
        }
    }

  private:
    std::set<Ident> used_;
    std::map<Ident, int> counters_;
};

}  // namespace co2
