/*
  Surface syntax: canonical states survive a print-and-reparse round
  trip, operator precedence, model detection, and the diagnostics
  raised for malformed files.
*/

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "co2/runtime/trace.hpp"
#include "co2/syntax/parser.hpp"

using namespace co2;
using Catch::Matchers::ContainsSubstring;
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

const char* const kBroker = R"(
model ccs
system {
  (x) (y) (z) (
    A[ tell C [x] (pay?.ship^).ask x (<> pay!).do x pay?.do x ship^.0 ]
  | B[ tell C [y] (pay!).do y pay!.0 ]
  | C[ fuse z (<> (pay! /\ <> ship^)).0 ]
  )
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

const char* const kFrog = R"(
model pcl
system {
  (x1) (b) (x2) (x3) (
    A[ tell A [x1] ((b says pay) -> ship).fuse x1 (A says ship).do x1 ship.0 ]
  | B[ tell A [x2] (pay).do x2 pay.0 ]
  | C[ tell A [x3] (kissFrog).do x3 kissFrog.0 ]
  )
}
)";

const char* const kEscrow = R"(
model ccs

def CE = shipE?.payE?.(pay! | ship!) + payE?.shipE?.(pay! | ship!)

proc PE(z) =
  do z shipE?.do z payE?.(do z pay!.0 | do z ship!.0)
  + do z payE?.do z shipE?.(do z pay!.0 | do z ship!.0)

system {
  (x) (y) (z) (
    A[ tell E [x] (shipE!.pay?).do x shipE!.ask x (<> pay!).do x pay?.0 ]
  | B[ tell E [y] (payE!.ship?).do y payE!.ask y (<> ship!).do y ship?.0 ]
  | E[ tell E [z] (CE).fuse z ((<> (shipE! /\ <> pay!)) /\ (<> (payE! /\ <> ship!))).PE(z) ]
  )
}
)";

// Reparse a printed state under the given declarations and insist the
// print is unchanged.
template <ContractModel M>
void roundtrip(const std::string& decls, const std::string& printed) {
    std::string src = "model " + std::string(M::name()) + "\n" + decls +
                      "system { " + printed + " }";
    auto f = syntax::parse_file<M>(src);
    CHECK(rt::to_string<M>(f.system, f.env) == printed);
}

template <ContractModel M>
void roundtrip_run(const char* source, const std::string& decls,
                   const rt::Chooser<M>& choose) {
    auto f = syntax::parse_file<M>(source);
    auto res = rt::run_trace<M>(f.system, f.env, 40, choose);
    roundtrip<M>(decls, res.initial);
    for (const auto& r : res.records) roundtrip<M>(decls, r.state);
}

}  // namespace

TEST_CASE("printing and reparsing fixes every reachable state") {
    roundtrip_run<PclModel>(kSale, "", rt::first_chooser<PclModel>());
    roundtrip_run<PclModel>(kFrog, "", rt::first_chooser<PclModel>());
    roundtrip_run<CcsModel>(kBroker, "", rt::first_chooser<CcsModel>());
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u})
        roundtrip_run<CcsModel>(kEcommerce, "",
                                rt::random_chooser<CcsModel>(seed));
}

TEST_CASE("declarations keep call sites and defined names stable") {
    const std::string loop_decl = "proc Loop = tau.Loop\n";
    auto f = syntax::parse_file<CcsModel>(
        "model ccs\n" + loop_decl + "system { A[ Loop ] }");
    CHECK(rt::to_string<CcsModel>(f.system, f.env) == "A[Loop]");
    roundtrip<CcsModel>(loop_decl, "A[Loop]");

    const std::string escrow_decls =
        "def CE = shipE?.payE?.(pay! | ship!) + payE?.shipE?.(pay! | ship!)\n"
        "proc PE(z) =\n"
        "  do z shipE?.do z payE?.(do z pay!.0 | do z ship!.0)\n"
        "  + do z payE?.do z shipE?.(do z pay!.0 | do z ship!.0)\n";
    roundtrip_run<CcsModel>(kEscrow, escrow_decls,
                            rt::first_chooser<CcsModel>());
}

TEST_CASE("parse errors point at the offending token") {
    auto pcl_fail = [](const char* src) {
        return [src] { syntax::parse_file<PclModel>(src); };
    };

    CHECK_THROWS_WITH(pcl_fail("")(),
                      "error at 1:1: expected 'model', got end of input");
    CHECK_THROWS_WITH(pcl_fail("model pcl\n")(),
                      "error at 2:1: missing system block");
    CHECK_THROWS_WITH(pcl_fail("model pcl\nsystem { A[ tell B (pay).0 ] }")(),
                      "error at 2:20: expected '[', got '('");
    CHECK_THROWS_WITH(pcl_fail("model pcl\nsystem { a[ tau.0 ] }")(),
                      ContainsSubstring("a is not a principal name"));
    CHECK_THROWS_WITH(pcl_fail("model pcl\nsystem { A[ tau.0 ] | A[ 0 ] }")(),
                      "duplicate agent A");
    CHECK_THROWS_WITH(
        pcl_fail("model pcl\nsystem { (x) ( A[ tau.0 ] ) | (x) ( B[ 0 ] ) }")(),
        ContainsSubstring("binder x is reused"));
    CHECK_THROWS_WITH(pcl_fail("model pcl\nlet fuse = pay\nsystem { A[ 0 ] }")(),
                      "error at 2:5: fuse is a keyword");
    CHECK_THROWS_WITH(pcl_fail("model pcl\nsystem { (A) ( B[ 0 ] ) }")(),
                      ContainsSubstring("cannot delimit the principal name A"));
    CHECK_THROWS_WITH(
        pcl_fail("model pcl\ndef K = tau.0\nsystem { A[ 0 ] }")(),
        "error at 2:1: defining equations are only available in the ccs model");
    CHECK_THROWS_WITH(
        [] { syntax::parse_file<CcsModel>("model pcl\nsystem { A[ 0 ] }"); }(),
        "error at 1:7: file declares model pcl but was parsed as ccs");
    CHECK_THROWS_WITH(
        [] {
            syntax::parse_file<CcsModel>(
                "model ccs\nsystem { (x) ( A[ tell A [x] (CE).0 ] ) }");
        }(),
        "undefined contract name CE");

    // ParseError keeps the structured diagnostic alongside the text.
    try {
        syntax::parse_file<PclModel>("model pcl\nsystem { A[ tell B (pay).0 ] }");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        REQUIRE(e.diagnostics.size() == 1);
        CHECK(e.diagnostics[0].span.begin.line == 2);
        CHECK(e.diagnostics[0].span.begin.col == 20);
        CHECK(e.diagnostics[0].severity == Severity::Error);
    }
}

TEST_CASE("prefixing binds tighter than choice and choice than parallel") {
    auto print_ccs = [](const char* s) {
        return ccs::to_string(syntax::parse_contract_string<CcsModel>(s));
    };
    CHECK(print_ccs("a?.b! + c^ | d?") == print_ccs("((a?.b!) + (c^)) | (d?)"));
    CHECK(print_ccs("a?.b! + c^ | d?") != print_ccs("a?.(b! + c^) | d?"));
    CHECK_THROWS_WITH(
        [&] { syntax::parse_contract_string<CcsModel>("(a?.b!) + (c^ | d?)"); }(),
        ContainsSubstring("only prefixed contract terms can be summed"));

    auto print_pcl = [](const char* s) {
        return pcl::to_string(syntax::parse_contract_string<PclModel>(s));
    };
    // Implication binds loosest and says tightest.
    CHECK(print_pcl("a /\\ b -> c") == print_pcl("(a /\\ b) -> c"));
    CHECK(print_pcl("b says pay -> ship") ==
          print_pcl("(b says pay) -> ship"));
    CHECK_THROWS_WITH(
        [&] { syntax::parse_contract_string<PclModel>("a -> (b -->> c)"); }(),
        "implication is not allowed inside a head or premise");
}

TEST_CASE("model detection reads the file header") {
    CHECK(syntax::detect_model("model ccs\nsystem { A[ 0 ] }") == "ccs");
    CHECK(syntax::detect_model(kSale) == "pcl");
    CHECK_THROWS_WITH(
        [] { syntax::detect_model("system { A[ 0 ] }"); }(),
        ContainsSubstring("must start with 'model ccs' or 'model pcl'"));
}

TEST_CASE("standalone contracts and observables parse in context") {
    auto c = syntax::parse_contract_string<CcsModel>("pay?.ship^");
    CHECK(ccs::to_string(c) == "pay?.ship^");

    auto obs = syntax::parse_observable_string<CcsModel>("<> (pay! /\\ <> ship^)");
    CHECK(CcsModel::observable_vars(obs).empty());

    auto phi = syntax::parse_observable_string<PclModel>("b says pay");
    CHECK(PclModel::observable_vars(phi) == std::set<Ident>{"b"});

    // Defined names resolve only when an environment is supplied.
    auto escrow = syntax::parse_file<CcsModel>(kEscrow);
    CHECK_NOTHROW(syntax::parse_contract_string<CcsModel>("CE", &escrow.env));
    CHECK_THROWS_WITH(
        [] { syntax::parse_contract_string<CcsModel>("CE"); }(),
        "undefined contract name CE");
}
