#include <catch2/catch_amalgamated.hpp>
TEST_CASE("evaluation placeholder") { SUCCEED(); }
