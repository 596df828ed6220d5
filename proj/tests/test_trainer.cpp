#include <catch2/catch_amalgamated.hpp>
#include "kexpfam.hpp"
TEST_CASE("smoke") { REQUIRE(1 == 1); }
