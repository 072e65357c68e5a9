/*
  Honesty verdicts over the bounded reachability graph: honest runs,
  culpable stuck states, unfair stalling loops, and the inconclusive
  verdict when the bounds cut the exploration short.  Every dishonesty
  witness is replayed through the step relation to confirm it denotes
  a real trace.
*/

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "co2/runtime/honesty.hpp"
#include "co2/syntax/parser.hpp"

using namespace co2;
namespace rt = co2::runtime;
using ccs::CcsModel;
using pcl::PclModel;

namespace {

const char* const kSale = R"(
model pcl
system {
  (x) (b) (y) (
    A[ tell A [x] ((b says pay) -> ship).fuse x (A says ship).do x ship.0 ]
  | B[ tell A [y] (pay).ask y (B says pay).do y pay.0 ]
  )
}
)";

// A promises to ship but only ever delivers snake oil.
const char* const kSnakeoilShip = R"(
model pcl
system {
  (x) (b) (y) (
    A[ tell A [x] ((b says pay) -> ship).fuse x (A says ship).do x snakeOil.0 ]
  | B[ tell A [y] (pay).ask y (B says pay).do y pay.0 ]
  )
}
)";

// The same seller with an honest advertisement for the same behaviour.
const char* const kSnakeoilHonest = R"(
model pcl
system {
  (x) (b) (y) (
    A[ tell A [x] ((b says pay) -> snakeOil).fuse x (A says snakeOil).do x snakeOil.0 ]
  | B[ tell A [y] (pay).ask y (B says pay).do y pay.0 ]
  )
}
)";

// A opens a session carrying a shipping obligation and then spins.
const char* const kStall = R"(
model pcl
proc Stall = tau.Stall
system {
  (x) ( A[ tell A [x] (ship).fuse x (A says ship).Stall ] )
}
)";

// Same loop, but every pass keeps the shipment on offer.
const char* const kFairWait = R"(
model pcl
proc Wait(u) = do u ship.0 + tau.Wait(u)
system {
  (x) ( A[ tell A [x] (ship).fuse x (A says ship).Wait(x) ] )
}
)";

const char* const kEcommerce = R"(
model ccs
system {
  (x) (y) (z) (
    A1[ tell B [x] (pay!.ship?).do x pay!.do x ship?.0 ]
  | A2[ tell B [y] (pay?.(ship! + fraud^)).do y pay?.do y fraud^.0 ]
  | B[ fuse z (<> (ship! \/ fraud^)).0 ]
  )
}
)";

template <ContractModel M>
rt::HonestyReport check(const syntax::ParsedFile<M>& f, const Ident& who,
                        rt::HonestyOptions opts = {}) {
    return rt::honesty_check<M>(f.system, f.env, who, opts);
}

// Walk the records from `s`, insisting each one matches an enabled
// step exactly; returns the final state.
template <ContractModel M>
rt::SystemState<M> replay(rt::SystemState<M> s, const rt::Env<M>& env,
                          const std::vector<rt::TraceRecord>& recs) {
    for (const auto& r : recs) {
        bool found = false;
        for (const auto& st : rt::enumerate_steps<M>(s, env))
            if (st.rule == r.rule && st.label == r.label &&
                rt::to_string<M>(st.next, env) == r.state) {
                s = st.next;
                found = true;
                break;
            }
        if (!found)
            FAIL("witness step " << r.step << " (" << r.label
                                 << ") is not enabled");
    }
    return s;
}

template <ContractModel M>
rt::SystemState<M> start(const syntax::ParsedFile<M>& f) {
    return rt::freeze_names<M>(rt::renormalise<M>(f.system));
}

}  // namespace

TEST_CASE("agents that deliver what they promise are honest") {
    auto sale = syntax::parse_file<PclModel>(kSale);
    for (const char* who : {"A", "B"}) {
        auto rep = check<PclModel>(sale, who);
        CHECK(rt::to_string(rep.verdict) == "honest");
        CHECK_FALSE(rep.witness.has_value());
        CHECK_FALSE(rep.truncated);
        CHECK(rep.states > 0);
    }

    auto honest = syntax::parse_file<PclModel>(kSnakeoilHonest);
    CHECK(check<PclModel>(honest, "A").verdict == rt::Verdict::Honest);
}

TEST_CASE("a broken promise leaves a culpable stuck state") {
    auto f = syntax::parse_file<PclModel>(kSnakeoilShip);

    auto rep = check<PclModel>(f, "A");
    REQUIRE(rep.verdict == rt::Verdict::Dishonest);
    REQUIRE(rep.witness.has_value());
    const auto& w = *rep.witness;
    CHECK(w.cycle.empty());
    CHECK_FALSE(w.stem.empty());
    CHECK(w.session == "s1");
    CHECK(w.obligations.find("ship") != std::string::npos);

    // The stem is a real trace and its endpoint is maximal.
    auto end = replay<PclModel>(start<PclModel>(f), f.env, w.stem);
    CHECK(rt::enumerate_steps<PclModel>(end, f.env).empty());
    CHECK(rt::to_string<PclModel>(end, f.env) == w.stem.back().state);

    // The buyer still discharges everything it promised.
    CHECK(check<PclModel>(f, "B").verdict == rt::Verdict::Honest);
}

TEST_CASE("an agent that stalls forever is dishonest") {
    auto f = syntax::parse_file<PclModel>(kStall);

    auto rep = check<PclModel>(f, "A");
    REQUIRE(rep.verdict == rt::Verdict::Dishonest);
    REQUIRE(rep.witness.has_value());
    const auto& w = *rep.witness;
    REQUIRE_FALSE(w.cycle.empty());
    CHECK(w.session == "s1");
    CHECK(w.obligations.find("ship") != std::string::npos);

    // Stem plus cycle replays, and the cycle really closes.
    auto knot = replay<PclModel>(start<PclModel>(f), f.env, w.stem);
    std::string before = rt::to_string<PclModel>(knot, f.env);
    auto back = replay<PclModel>(knot, f.env, w.cycle);
    CHECK(rt::to_string<PclModel>(back, f.env) == before);
}

TEST_CASE("a persistent offer redeems a stalling agent") {
    // Fairness: the loop that forever ignores its own enabled offer is
    // not a counterexample, so the waiting variant is honest while the
    // offerless one above is not.
    auto f = syntax::parse_file<PclModel>(kFairWait);
    auto rep = check<PclModel>(f, "A");
    CHECK(rep.verdict == rt::Verdict::Honest);
    CHECK_FALSE(rep.truncated);
}

TEST_CASE("a fraudulent branch condemns only its author") {
    auto f = syntax::parse_file<CcsModel>(kEcommerce);

    auto a1 = check<CcsModel>(f, "A1");
    REQUIRE(a1.verdict == rt::Verdict::Dishonest);
    REQUIRE(a1.witness.has_value());
    CHECK(a1.witness->obligations.find("ship") != std::string::npos);
    auto end = replay<CcsModel>(start<CcsModel>(f), f.env, a1.witness->stem);
    if (a1.witness->cycle.empty())
        CHECK(rt::enumerate_steps<CcsModel>(end, f.env).empty());

    CHECK(check<CcsModel>(f, "A2").verdict == rt::Verdict::Honest);
}

TEST_CASE("exploration bounds yield inconclusive, never a guess") {
    auto f = syntax::parse_file<CcsModel>(kEcommerce);

    rt::HonestyOptions tiny;
    tiny.max_states = 2;
    auto rep = check<CcsModel>(f, "A1", tiny);
    CHECK(rep.verdict == rt::Verdict::Inconclusive);
    CHECK(rep.truncated);
    CHECK_FALSE(rep.witness.has_value());

    rt::HonestyOptions shallow;
    shallow.max_depth = 1;
    auto rep2 = check<CcsModel>(f, "A1", shallow);
    CHECK(rep2.verdict == rt::Verdict::Inconclusive);
    CHECK(rep2.truncated);
}
