#pragma once

/*
  Independent reference implementations the test suite judges the
  library against.

  Temporal side: maximal traces of a contract graph are enumerated
  explicitly (finite runs into stuck states, lassos from any path that
  revisits a state) and formulae are evaluated on those words with the
  textbook fixpoint semantics.  Logical side: the greatest supported
  set of contractual clauses is found by enumerating every subset and
  keeping the self-supported ones, whose union is the greatest; the
  entailed set is then a naive saturation.  Both sides also ship the
  random generators the property suites draw from.
*/

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "co2/ccs/ltl.hpp"
#include "co2/pcl/entail.hpp"

namespace oracles {

// ---------------------------------------------------------------------
// Words and temporal evaluation
// ---------------------------------------------------------------------

struct Word {
    std::vector<co2::ccs::Label> labels;
    std::size_t loop = 0;    // index the word returns to, if periodic
    bool periodic = false;

    std::string key() const {
        std::string k = periodic ? "p" + std::to_string(loop) : "f";
        for (const auto& l : labels) k += "|" + l.str();
        return k;
    }
};

// Truth of phi at every position of the word, computed bottom-up.
inline std::vector<bool> eval_positions(const co2::ccs::LtlPtr& phi,
                                        const Word& w) {
    using co2::ccs::Ltl;
    std::size_t n = w.labels.size();
    auto next = [&](std::size_t i) -> std::size_t {
        if (i + 1 < n) return i + 1;
        return w.periodic ? w.loop : n;  // n acts as "no successor"
    };
    std::vector<bool> a, b;
    if (phi->a) a = eval_positions(phi->a, w);
    if (phi->b) b = eval_positions(phi->b, w);
    std::vector<bool> t(n, false);
    switch (phi->kind) {
        case Ltl::Kind::True:
            t.assign(n, true);
            break;
        case Ltl::Kind::False:
            break;
        case Ltl::Kind::AtomProp:
            for (std::size_t i = 0; i < n; ++i)
                t[i] = atom_holds(phi->atom, w.labels[i]);
            break;
        case Ltl::Kind::Not:
            for (std::size_t i = 0; i < n; ++i) t[i] = !a[i];
            break;
        case Ltl::Kind::And:
            for (std::size_t i = 0; i < n; ++i) t[i] = a[i] && b[i];
            break;
        case Ltl::Kind::Or:
            for (std::size_t i = 0; i < n; ++i) t[i] = a[i] || b[i];
            break;
        case Ltl::Kind::Next:
            for (std::size_t i = 0; i < n; ++i) t[i] = next(i) < n && a[next(i)];
            break;
        case Ltl::Kind::Eventually:
        case Ltl::Kind::Until: {
            const std::vector<bool>& goal = phi->kind == Ltl::Kind::Until ? b : a;
            auto hold = [&](std::size_t i) {
                return phi->kind == Ltl::Kind::Until ? a[i] : true;
            };
            bool changed = true;
            while (changed) {
                changed = false;
                for (std::size_t i = n; i-- > 0;) {
                    bool v = goal[i] || (hold(i) && next(i) < n && t[next(i)]);
                    if (v != t[i]) t[i] = v, changed = true;
                }
            }
            break;
        }
        case Ltl::Kind::Always: {
            t.assign(n, true);
            bool changed = true;
            while (changed) {
                changed = false;
                for (std::size_t i = n; i-- > 0;) {
                    bool v = a[i] && (next(i) >= n || t[next(i)]);
                    if (v != t[i]) t[i] = v, changed = true;
                }
            }
            break;
        }
    }
    return t;
}

inline bool eval_word(const co2::ccs::LtlPtr& phi, const Word& w) {
    using co2::ccs::Ltl;
    if (!w.labels.empty()) return eval_positions(phi, w)[0];
    // The empty maximal trace of a stuck initial state.
    switch (phi->kind) {
        case Ltl::Kind::True: return true;
        case Ltl::Kind::False: return false;
        case Ltl::Kind::AtomProp: return false;
        case Ltl::Kind::Not: return !eval_word(phi->a, w);
        case Ltl::Kind::And: return eval_word(phi->a, w) && eval_word(phi->b, w);
        case Ltl::Kind::Or: return eval_word(phi->a, w) || eval_word(phi->b, w);
        case Ltl::Kind::Next: return false;
        case Ltl::Kind::Eventually: return false;
        case Ltl::Kind::Until: return false;
        case Ltl::Kind::Always: return true;
    }
    return false;
}

// All maximal finite traces and all lassos reachable with at most
// `bound` steps, keyed to avoid duplicates.
inline std::map<std::string, Word> enumerate_words(const co2::ccs::Graph& g,
                                                   std::size_t bound) {
    std::map<std::string, Word> out;
    struct Frame {
        std::size_t state;
        std::vector<std::size_t> path_states;
        std::vector<co2::ccs::Label> labels;
    };
    std::vector<Frame> stack{{0, {0}, {}}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        if (g.edges[f.state].empty()) {
            Word w{f.labels, 0, false};
            out.emplace(w.key(), std::move(w));
            continue;
        }
        for (std::size_t j = 0; j + 1 < f.path_states.size(); ++j)
            if (f.path_states[j] == f.state) {
                Word w{f.labels, j, true};
                out.emplace(w.key(), std::move(w));
            }
        if (f.labels.size() >= bound) continue;
        for (const auto& e : g.edges[f.state]) {
            Frame g2 = f;
            g2.state = e.target;
            g2.path_states.push_back(e.target);
            g2.labels.push_back(g.labels[e.label]);
            stack.push_back(std::move(g2));
        }
    }
    return out;
}

inline Word witness_word(const co2::ccs::TraceWitness& tw) {
    Word w;
    w.labels = tw.stem;
    if (!tw.cycle.empty()) {
        w.periodic = true;
        w.loop = tw.stem.size();
        w.labels.insert(w.labels.end(), tw.cycle.begin(), tw.cycle.end());
    }
    return w;
}

// ---------------------------------------------------------------------
// Random contracts and temporal formulae
// ---------------------------------------------------------------------

inline co2::ccs::TermPtr random_term(std::mt19937& rng, int depth) {
    using namespace co2::ccs;
    std::uniform_int_distribution<int> shape(0, depth > 0 ? 3 : 0);
    std::uniform_int_distribution<int> pick(0, 1);
    std::uniform_int_distribution<int> pol(0, 2);
    auto atom = [&] {
        return Atom{pick(rng) ? "a" : "b", static_cast<Polarity>(pol(rng))};
    };
    switch (shape(rng)) {
        case 0: return zero();
        case 1: return prefix(atom(), random_term(rng, depth - 1));
        case 2:
            return par({random_term(rng, depth - 1), random_term(rng, depth - 1)});
        default:
            return sum({Branch{atom(), random_term(rng, depth - 1)},
                        Branch{atom(), random_term(rng, depth - 1)}});
    }
}

inline co2::ccs::LtlPtr random_formula(std::mt19937& rng, int depth) {
    using namespace co2::ccs;
    std::uniform_int_distribution<int> shape(0, depth > 0 ? 6 : 0);
    std::uniform_int_distribution<int> pick(0, 1);
    std::uniform_int_distribution<int> pol(0, 2);
    switch (shape(rng)) {
        case 0:
            return ltl_atom(
                Atom{pick(rng) ? "a" : "b", static_cast<Polarity>(pol(rng))});
        case 1: return ltl_not(random_formula(rng, depth - 1));
        case 2:
            return ltl_and(random_formula(rng, depth - 1),
                           random_formula(rng, depth - 1));
        case 3:
            return ltl_or(random_formula(rng, depth - 1),
                          random_formula(rng, depth - 1));
        case 4: return ltl_eventually(random_formula(rng, depth - 1));
        case 5: return ltl_always(random_formula(rng, depth - 1));
        default:
            return ltl_until(random_formula(rng, depth - 1),
                             random_formula(rng, depth - 1));
    }
}

// ---------------------------------------------------------------------
// Clausal reference prover
// ---------------------------------------------------------------------

struct Facts {
    std::set<co2::pcl::PclAtom> atoms;
    std::set<std::set<co2::pcl::PclAtom>> disjunctions;

    bool operator==(const Facts&) const = default;
};

inline void put_atom(Facts& f, co2::pcl::PclAtom a) {
    f.atoms.insert(a);
    if (a.fact) {
        a.fact = false;
        f.atoms.insert(a);
    }
}

inline void put_head(Facts& f, const co2::pcl::HeadForm& head) {
    for (const auto& dis : head) {
        if (dis.size() == 1)
            put_atom(f, *dis.begin());
        else
            f.disjunctions.insert(dis);
    }
}

// Saturate the unconditional atoms and the heads of the granted
// contractual clauses under the plain-implication clauses.
inline Facts chain(const co2::pcl::PclEnv& env,
                   const std::vector<const co2::pcl::Clause*>& granted) {
    Facts f;
    for (const auto& a : env.atoms) put_atom(f, a);
    for (const auto* c : granted) put_head(f, c->head);
    bool moved = true;
    while (moved) {
        moved = false;
        Facts before = f;
        for (const auto& c : env.clauses) {
            if (c.contractual) continue;
            bool fire = true;
            for (const auto& p : c.premises) fire = fire && f.atoms.count(p) > 0;
            if (fire) put_head(f, c.head);
        }
        moved = !(f == before);
    }
    return f;
}

inline std::vector<const co2::pcl::Clause*> contractual_clauses(
    const co2::pcl::PclEnv& env) {
    std::vector<const co2::pcl::Clause*> out;
    for (const auto& c : env.clauses)
        if (c.contractual) out.push_back(&c);
    return out;
}

inline bool self_supported(const co2::pcl::PclEnv& env,
                           const std::vector<const co2::pcl::Clause*>& chosen) {
    Facts f = chain(env, chosen);
    for (const auto* c : chosen)
        for (const auto& p : c->premises)
            if (!f.atoms.count(p)) return false;
    return true;
}

// The union of all self-supported subsets is itself self-supported and
// so is the greatest one.
inline std::vector<const co2::pcl::Clause*> exhaustive_supported(
    const co2::pcl::PclEnv& env) {
    auto cimps = contractual_clauses(env);
    std::set<const co2::pcl::Clause*> keep;
    for (std::size_t mask = 0; mask < (std::size_t{1} << cimps.size()); ++mask) {
        std::vector<const co2::pcl::Clause*> chosen;
        for (std::size_t i = 0; i < cimps.size(); ++i)
            if (mask >> i & 1) chosen.push_back(cimps[i]);
        if (self_supported(env, chosen)) keep.insert(chosen.begin(), chosen.end());
    }
    return {keep.begin(), keep.end()};
}

inline Facts facts_by_enumeration(const co2::pcl::PclEnv& env) {
    return chain(env, exhaustive_supported(env));
}

// Start from every contractual clause and delete one unsupported
// clause at a time in random order until stable.
inline std::set<const co2::pcl::Clause*> deletion_supported(
    const co2::pcl::PclEnv& env, std::mt19937& rng) {
    auto w = contractual_clauses(env);
    std::shuffle(w.begin(), w.end(), rng);
    while (true) {
        Facts f = chain(env, w);
        std::vector<std::size_t> unsupported;
        for (std::size_t i = 0; i < w.size(); ++i)
            for (const auto& p : w[i]->premises)
                if (!f.atoms.count(p)) {
                    unsupported.push_back(i);
                    break;
                }
        if (unsupported.empty()) return {w.begin(), w.end()};
        std::uniform_int_distribution<std::size_t> pick(0, unsupported.size() - 1);
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(unsupported[pick(rng)]));
    }
}

inline bool covered_by(const Facts& f, const std::set<co2::pcl::PclAtom>& dis) {
    for (const auto& a : dis)
        if (f.atoms.count(a)) return true;
    for (const auto& whole : f.disjunctions)
        if (std::includes(dis.begin(), dis.end(), whole.begin(), whole.end()))
            return true;
    return false;
}

inline bool eval_head(const Facts& f, const co2::pcl::HeadForm& head) {
    for (const auto& dis : head)
        if (!covered_by(f, dis)) return false;
    return true;
}

// ---------------------------------------------------------------------
// Random clause environments and goals
// ---------------------------------------------------------------------

inline co2::pcl::PclAtom random_pcl_atom(std::mt19937& rng) {
    static const char* names[] = {"a", "b", "c", "d"};
    static const char* sayers[] = {"A", "B"};
    std::uniform_int_distribution<int> name(0, 3);
    std::uniform_int_distribution<int> sayer(0, 1);
    std::uniform_int_distribution<int> kind(0, 3);
    co2::pcl::PclAtom a;
    a.name = names[name(rng)];
    a.sayer = sayers[sayer(rng)];
    a.fact = kind(rng) == 0;
    return a;
}

inline co2::pcl::HeadForm random_head(std::mt19937& rng) {
    std::uniform_int_distribution<int> one_two(1, 2);
    co2::pcl::HeadForm head;
    int nd = one_two(rng);
    for (int d = 0; d < nd; ++d) {
        std::set<co2::pcl::PclAtom> dis;
        int na = one_two(rng);
        for (int a = 0; a < na; ++a) dis.insert(random_pcl_atom(rng));
        head.push_back(std::move(dis));
    }
    co2::pcl::canonicalise_head(head);
    return head;
}

inline co2::pcl::PclEnv random_env(std::mt19937& rng, int max_clauses = 8) {
    std::uniform_int_distribution<int> count(1, max_clauses);
    std::uniform_int_distribution<int> shape(0, 3);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> premise_count(0, 2);
    co2::pcl::PclEnv env;
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
        if (shape(rng) == 0) {
            env.atoms.insert(random_pcl_atom(rng));
            continue;
        }
        co2::pcl::Clause c;
        c.contractual = coin(rng) == 1;
        int np = premise_count(rng);
        for (int p = 0; p < np; ++p) c.premises.push_back(random_pcl_atom(rng));
        c.head = random_head(rng);
        env.clauses.push_back(std::move(c));
    }
    co2::pcl::canonicalise_env(env);
    return env;
}

// A goal both sides can judge: a positive combination, or a single
// implication clause whose shape is generated structurally so the
// reference prover never has to parse it.
struct GoalCase {
    enum class Kind { Combo, Imp, CImp };
    Kind kind = Kind::Combo;
    std::vector<co2::pcl::PclAtom> premises;
    co2::pcl::HeadForm head;
    co2::pcl::FormulaPtr formula;
};

inline co2::pcl::FormulaPtr formula_of_head(const co2::pcl::HeadForm& head) {
    using namespace co2::pcl;
    if (head.empty()) return f_true();
    FormulaPtr conj;
    for (const auto& dis : head) {
        FormulaPtr d;
        for (const auto& a : dis) d = d ? f_or(d, f_atom(a)) : f_atom(a);
        conj = conj ? f_and(conj, d) : d;
    }
    return conj;
}

inline GoalCase random_goal(std::mt19937& rng) {
    using namespace co2::pcl;
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_int_distribution<int> premise_count(0, 2);
    GoalCase g;
    g.kind = static_cast<GoalCase::Kind>(kind(rng));
    g.head = random_head(rng);
    if (g.kind == GoalCase::Kind::Combo) {
        g.formula = formula_of_head(g.head);
        return g;
    }
    int np = premise_count(rng);
    for (int p = 0; p < np; ++p) g.premises.push_back(random_pcl_atom(rng));
    std::sort(g.premises.begin(), g.premises.end());
    g.premises.erase(std::unique(g.premises.begin(), g.premises.end()),
                     g.premises.end());
    FormulaPtr lhs;
    for (const auto& p : g.premises)
        lhs = lhs ? f_and(lhs, f_atom(p)) : f_atom(p);
    if (!lhs) lhs = f_true();
    FormulaPtr rhs = formula_of_head(g.head);
    g.formula = g.kind == GoalCase::Kind::Imp ? f_imp(lhs, rhs) : f_cimp(lhs, rhs);
    return g;
}

inline bool entails_by_enumeration(const co2::pcl::PclEnv& env,
                                   const GoalCase& goal) {
    using co2::pcl::Clause;
    switch (goal.kind) {
        case GoalCase::Kind::Combo:
            return eval_head(facts_by_enumeration(env), goal.head);
        case GoalCase::Kind::Imp: {
            co2::pcl::PclEnv extended = env;
            for (const auto& p : goal.premises) extended.atoms.insert(p);
            return eval_head(facts_by_enumeration(extended), goal.head);
        }
        case GoalCase::Kind::CImp: {
            if (eval_head(facts_by_enumeration(env), goal.head)) return true;
            std::set<co2::pcl::PclAtom> goal_premises(goal.premises.begin(),
                                                      goal.premises.end());
            for (const auto& c : env.clauses) {
                if (!c.contractual) continue;
                bool weaker = true;
                for (const auto& p : c.premises)
                    weaker = weaker && goal_premises.count(p) > 0;
                if (!weaker) continue;
                bool head_ok = true;
                for (const auto& w : goal.head) {
                    bool some = false;
                    for (const auto& s : c.head)
                        some = some ||
                               std::includes(w.begin(), w.end(), s.begin(), s.end());
                    head_ok = head_ok && some;
                }
                if (head_ok) return true;
            }
            return false;
        }
    }
    return false;
}

}  // namespace oracles
