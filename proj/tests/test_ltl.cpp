/*
  The temporal checker is validated against an independent oracle that
  enumerates the runs of a graph explicitly: every maximal finite trace
  up to a length bound, plus every ultimately periodic trace obtained
  from a path that revisits a state.  Formulae are evaluated on those
  words directly from the textbook semantics (least fixpoint for until,
  greatest for always, strong next on finite words).  The checker must
  never contradict the oracle on words the oracle can see, and any
  witness the checker produces must satisfy the formula under the
  oracle's evaluation.
*/
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "co2/ccs/ltl.hpp"
#include "oracles.hpp"

using namespace co2;
using namespace co2::ccs;
using oracles::enumerate_words;
using oracles::eval_word;
using oracles::random_formula;
using oracles::random_term;
using oracles::witness_word;

namespace {

void cross_check(const Graph& g, const LtlPtr& phi, std::size_t bound) {
    auto witness = exists_trace(g, phi);
    auto words = enumerate_words(g, bound);
    bool oracle_any = false;
    for (const auto& [k, w] : words) oracle_any = oracle_any || eval_word(phi, w);
    INFO("formula " << to_string(phi));
    if (witness) {
        CHECK(eval_word(phi, witness_word(*witness)));
    } else {
        CHECK_FALSE(oracle_any);
    }
}

TermPtr pre(const std::string& name, Polarity pol, TermPtr cont = zero()) {
    return prefix(Atom{name, pol}, std::move(cont));
}

LtlPtr at(const std::string& name, Polarity pol) {
    return ltl_atom(Atom{name, pol});
}

}  // namespace

TEST_CASE("checker agrees with the trace oracle on random contracts") {
    std::mt19937 rng(20260825);
    for (int i = 0; i < 200; ++i) {
        auto c = canonicalise(par({says("A", random_term(rng, 2)),
                                   says("B", random_term(rng, 2))}));
        Graph g = reachable(c, {}, 1000);
        if (g.states.size() > 20) continue;
        for (int j = 0; j < 3; ++j)
            cross_check(g, random_formula(rng, 3), 8);
    }
}

TEST_CASE("checker agrees with the oracle on looping definitions") {
    Defs defs;
    defs["X"] = sum({Branch{Atom{"a", Polarity::Autonomous}, ref("X")}});
    defs["Y"] = sum({Branch{Atom{"a", Polarity::Autonomous}, ref("Y")},
                     Branch{Atom{"b", Polarity::Autonomous}, zero()}});
    std::mt19937 rng(7);
    for (const char* name : {"X", "Y"}) {
        Graph g = reachable(canonicalise(says("A", ref(name))), defs, 1000);
        for (int j = 0; j < 40; ++j)
            cross_check(g, random_formula(rng, 3), 8);
    }
}

TEST_CASE("eventually and always on the looping contract") {
    Defs defs;
    defs["X"] = sum({Branch{Atom{"a", Polarity::Autonomous}, ref("X")},
                     Branch{Atom{"b", Polarity::Autonomous}, zero()}});
    Graph g = reachable(canonicalise(says("A", ref("X"))), defs, 1000);
    CHECK(entails(g, ltl_always(
                         ltl_or(at("a", Polarity::Autonomous),
                                at("b", Polarity::Autonomous)))));
    // The loop a.a.a... never reaches b, so <> b is not guaranteed.
    CHECK_FALSE(entails(g, ltl_eventually(at("b", Polarity::Autonomous))));
    auto w = exists_trace(
        g, ltl_not(ltl_eventually(at("b", Polarity::Autonomous))));
    REQUIRE(w.has_value());
    CHECK_FALSE(w->cycle.empty());
}

TEST_CASE("strong and weak next at the end of a finite trace") {
    auto c = canonicalise(says("A", pre("a", Polarity::Autonomous,
                                        pre("b", Polarity::Autonomous))));
    Graph g = reachable(c, {}, 100);
    CHECK(entails(g, ltl_next(at("b", Polarity::Autonomous))));
    CHECK_FALSE(entails(g, ltl_next(ltl_next(ltl_true()))));
    // not-X-not, the weak variant, holds at the last position.
    CHECK(entails(g, ltl_always(ltl_not(ltl_next(ltl_false())))));
    CHECK_FALSE(entails(g, ltl_always(ltl_next(ltl_true()))));
}

TEST_CASE("the empty trace of a stuck contract") {
    Graph g = reachable(canonicalise(says("A", pre("a", Polarity::Input))),
                        {}, 100);
    CHECK(entails(g, ltl_always(ltl_false())));
    CHECK_FALSE(entails(g, ltl_eventually(ltl_true())));
    auto w = exists_trace(g, ltl_true());
    REQUIRE(w.has_value());
    CHECK(w->stem.empty());
    CHECK(w->cycle.empty());
}

TEST_CASE("until distinguishes the path condition") {
    auto c = canonicalise(par(
        {says("A", pre("a", Polarity::Autonomous,
                       pre("b", Polarity::Autonomous)))}));
    Graph g = reachable(c, {}, 100);
    CHECK(entails(g, ltl_until(at("a", Polarity::Autonomous),
                               at("b", Polarity::Autonomous))));
    // The hold condition fails at the first position and the goal is
    // not yet reached, so the until cannot be discharged.
    CHECK_FALSE(entails(g, ltl_until(at("b", Polarity::Autonomous),
                                     at("b", Polarity::Autonomous))));
}
