#include <catch2/catch_amalgamated.hpp>

#include "co2/ident.hpp"

using namespace co2;

TEST_CASE("name sorts") {
    CHECK(is_principal_name("A"));
    CHECK(is_principal_name("A1"));
    CHECK(is_principal_name("Broker"));
    CHECK_FALSE(is_principal_name("a"));
    CHECK_FALSE(is_principal_name("_A"));
    CHECK_FALSE(is_principal_name(""));

    CHECK(is_session_name("s1"));
    CHECK(is_session_name("s42"));
    CHECK_FALSE(is_session_name("s"));
    CHECK_FALSE(is_session_name("s1x"));
    CHECK_FALSE(is_session_name("t1"));
    CHECK_FALSE(is_session_name("S1"));

    CHECK(is_variable("x"));
    CHECK(is_variable("x_1"));
    CHECK(is_variable("ship"));
    CHECK_FALSE(is_variable("A"));
    CHECK_FALSE(is_variable("s1"));
    CHECK_FALSE(is_variable(""));
}

TEST_CASE("substitution application") {
    Subst sigma{{"x", "s1"}, {"b", "B"}};
    CHECK(apply_subst(sigma, "x") == "s1");
    CHECK(apply_subst(sigma, "b") == "B");
    CHECK(apply_subst(sigma, "y") == "y");
}

TEST_CASE("strict sub-substitution ordering") {
    Subst small{{"x", "s1"}};
    Subst big{{"x", "s1"}, {"y", "s1"}};
    Subst other{{"x", "s2"}};
    CHECK(strict_sub_subst(small, big));
    CHECK_FALSE(strict_sub_subst(big, small));
    CHECK_FALSE(strict_sub_subst(small, small));
    CHECK_FALSE(strict_sub_subst(other, big));
}

TEST_CASE("fresh session names take the lowest free index") {
    CHECK(fresh_session_name({}) == "s1");
    CHECK(fresh_session_name({"s1"}) == "s2");
    CHECK(fresh_session_name({"s2", "x", "A"}) == "s1");
    CHECK(fresh_session_name({"s1", "s2", "s3"}) == "s4");
}

TEST_CASE("fresh variable allocator avoids the used set") {
    FreshVarAllocator alloc{{"x", "x#1", "y"}};
    CHECK(alloc.next("x") == "x#2");
    CHECK(alloc.next("x") == "x#3");
    CHECK(alloc.next("y") == "y#1");
    CHECK(alloc.next("z") == "z#1");
}
