/*
  The translation from clausal contracts to processes is pinned down on
  small shapes first, then exercised on a seeded corpus: the logical
  and the process side of both correspondence checks must agree on
  every instance, the translation must not conflate distinct
  normalised formulas, and the residuals of an encoding reachable
  without giving a promise up must keep every offer component while
  input chains only shorten.
*/
#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include "co2/encoding/corpus.hpp"
#include "co2/encoding/pcl_to_ccs.hpp"

using namespace co2;
using namespace co2::encoding;

namespace {

pcl::FormulaPtr pa(const std::string& name, Ident sayer = {}) {
    return pcl::f_atom(pcl::promise(name, std::move(sayer)));
}

std::string print(const ccs::State& s) { return ccs::to_string(s); }

bool is_tau(const ccs::Label& l) {
    return l.kind == ccs::Label::Kind::Auto && l.atom.name == "tau";
}

// Def names referenced by a printed state.
std::set<std::string> outs_present(const std::string& printed,
                                   const ccs::Defs& defs) {
    std::set<std::string> out;
    for (const auto& [name, body] : defs)
        if (printed.find(name) != std::string::npos) out.insert(name);
    return out;
}

std::size_t input_count(const std::string& printed) {
    return static_cast<std::size_t>(
        std::count(printed.begin(), printed.end(), '?'));
}

}  // namespace

TEST_CASE("promise conjunctions become parallel offer components") {
    Encoded enc = encode(f_says("A", pa("a")));
    CHECK(print(enc.state) == "A says (OUT_a/A)");
    REQUIRE(enc.defs.count("OUT_a/A") == 1);
    CHECK(ccs::to_string(ccs::canonicalise(enc.defs.at("OUT_a/A"))) ==
          "a/A!.(OUT_a/A) + tau^");

    Encoded both = encode(f_says("A", f_and(pa("a"), pa("b"))));
    CHECK(print(both.state) == "A says (OUT_a/A) | A says (OUT_b/A)");
}

TEST_CASE("implications chain their premises as inputs") {
    Encoded plain = encode(f_says("A", pcl::f_imp(pa("b", "B"), pa("a"))));
    CHECK(print(plain.state) == "A says (b/B?.(OUT_a/A))");

    Encoded contractual = encode(f_says("A", pcl::f_cimp(pa("b", "B"), pa("a"))));
    CHECK(print(contractual.state) == "A says (OUT_a/A) | A says (b/B?)");

    Encoded two = encode(f_says(
        "A", pcl::f_imp(pcl::f_and(pa("b", "B"), pa("c", "C")), pa("a"))));
    CHECK(print(two.state) == "A says (b/B?.c/C?.(OUT_a/A))");

    Encoded empty_head = encode(f_says("A", pcl::f_imp(pa("b", "B"), pcl::f_true())));
    CHECK(print(empty_head.state) == "A says (b/B?)");
}

TEST_CASE("encoding totality ends at the fragment boundary") {
    CHECK_THROWS_AS(encode(pa("a")), FragmentError);
    CHECK_THROWS_AS(encode(f_says("A", pcl::f_or(pa("a"), pa("b")))),
                    FragmentError);
    CHECK_THROWS_AS(encode(f_says("A", pcl::f_atom(pcl::fact("a")))),
                    FragmentError);
    CHECK_THROWS_AS(
        encode(f_says("A", pcl::f_imp(pa("b", "B"), pa("a", "B")))),
        FragmentError);
    CHECK_THROWS_AS(
        encode(f_says("A", pcl::f_imp(pcl::f_imp(pa("a"), pa("b")), pa("c")))),
        FragmentError);
    CHECK(print(encode(pcl::f_true()).state) == "0");
}

TEST_CASE("latent actions collect owner and premise tags") {
    auto f = f_and(f_says("A", pcl::f_cimp(pa("pay", "B"), pa("ship"))),
                   f_says("B", pa("pay")));
    std::set<std::pair<Ident, std::string>> expected{{"A", "ship"}, {"B", "pay"}};
    CHECK(latent_actions(f) == expected);
}

TEST_CASE("the sale contracts agree on both correspondence checks") {
    auto f = f_and(f_says("A", pcl::f_cimp(pa("pay", "B"), pa("ship"))),
                   f_says("B", pa("pay")));
    TheoremReport reach = check_entail_vs_reach(f);
    CHECK(reach.lhs);
    CHECK(reach.rhs);
    CHECK(reach.agree());
    REQUIRE(reach.witness.has_value());

    // The witness replays step by step from the encoded initial state.
    Encoded enc = encode(f);
    ccs::State at = enc.state;
    for (const auto& label : *reach.witness) {
        auto options = ccs::step(at, enc.defs);
        bool advanced = false;
        for (auto& [l, next] : options)
            if (l == label) {
                at = next;
                advanced = true;
                break;
            }
        REQUIRE(advanced);
    }
    CHECK(print(at) == "0");

    TheoremReport fulfil = check_fulfil_vs_fulfil(f);
    CHECK(fulfil.lhs);
    CHECK(fulfil.rhs);
    CHECK(fulfil.agree());
}

TEST_CASE("interaction rows keep their logical verdicts") {
    auto imp_row = [](bool a_cimp, bool b_cimp) {
        auto left = a_cimp ? pcl::f_cimp(pa("b", "B"), pa("a"))
                           : pcl::f_imp(pa("b", "B"), pa("a"));
        auto right = b_cimp ? pcl::f_cimp(pa("a", "A"), pa("b"))
                            : pcl::f_imp(pa("a", "A"), pa("b"));
        return f_and(f_says("A", left), f_says("B", right));
    };

    auto handover = f_and(f_says("A", pcl::f_imp(pa("b", "B"), pa("a"))),
                          f_says("B", pa("b")));
    auto crossed_plain = imp_row(false, false);
    auto one_contractual = imp_row(false, true);
    auto both_contractual = imp_row(true, true);

    for (const auto& [f, expect] :
         std::vector<std::pair<pcl::FormulaPtr, bool>>{
             {handover, true},
             {crossed_plain, false},
             {one_contractual, true},
             {both_contractual, true}}) {
        TheoremReport reach = check_entail_vs_reach(f);
        TheoremReport fulfil = check_fulfil_vs_fulfil(f);
        INFO("formula " << pcl::to_string(f));
        CHECK(reach.lhs == expect);
        CHECK(reach.agree());
        CHECK(fulfil.agree());
    }
}

TEST_CASE("seeded corpus agreement on both checks") {
    std::mt19937 rng(20260825);
    int reach_true = 0, fulfil_true = 0;
    for (int i = 0; i < 500; ++i) {
        auto f = random_minus_formula(rng);
        TheoremReport reach = check_entail_vs_reach(f);
        TheoremReport fulfil = check_fulfil_vs_fulfil(f);
        INFO("formula " << pcl::to_string(f));
        CHECK(reach.agree());
        CHECK(fulfil.agree());
        CHECK(reach.lhs == fulfil.lhs);
        reach_true += reach.rhs;
        fulfil_true += fulfil.rhs;
    }
    CHECK(reach_true > 50);
    CHECK(reach_true < 450);
    CHECK(fulfil_true == reach_true);
}

TEST_CASE("distinct normalised formulas never share an encoding") {
    std::mt19937 rng(20260825);
    std::map<std::string, std::string> seen;  // encoding -> environment
    for (int i = 0; i < 500; ++i) {
        auto f = random_minus_formula(rng);
        std::string env = pcl::to_string(pcl::normalise(f));
        std::string sig = print(encode(f).state);
        auto [it, fresh] = seen.emplace(sig, env);
        INFO("encoding " << sig);
        if (!fresh) CHECK(it->second == env);
    }
}

TEST_CASE("residuals keep offers and shorten input chains") {
    std::mt19937 rng(4297);
    for (int i = 0; i < 100; ++i) {
        Encoded enc = encode(random_minus_formula(rng));
        ccs::Graph g = ccs::reachable(enc.state, enc.defs, 10000);
        for (std::size_t s = 0; s < g.states.size(); ++s) {
            std::string from = print(g.states[s]);
            auto outs_from = outs_present(from, enc.defs);
            for (const auto& e : g.edges[s]) {
                if (is_tau(g.labels[e.label])) continue;
                std::string to = print(g.states[e.target]);
                INFO(from << "  --" << g.labels[e.label].str() << "-->  " << to);
                auto outs_to = outs_present(to, enc.defs);
                CHECK(std::includes(outs_to.begin(), outs_to.end(),
                                    outs_from.begin(), outs_from.end()));
                CHECK(input_count(to) <= input_count(from));
            }
        }
    }
}

TEST_CASE("mangling keeps principals apart") {
    CHECK(mangle("A", "a") == "a/A");
    std::set<std::string> tags;
    for (const std::string p : {"A", "B", "C"})
        for (const std::string a : {"a", "b", "pay", "ship"})
            tags.insert(mangle(p, a));
    CHECK(tags.size() == 12);
}
