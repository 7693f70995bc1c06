#include "doctest.h"

#include <set>

#include "recovery/random.hpp"

using namespace recovery;

TEST_SUITE("random") {

TEST_CASE("derive_seed is a pure function of its keys") {
    CHECK(derive_seed(42, 1, 2) == derive_seed(42, 1, 2));
    CHECK(derive_seed(42, 1, 2) != derive_seed(42, 2, 1));
    CHECK(derive_seed(42, 1) != derive_seed(43, 1));
    CHECK(derive_seed(7, "hazard") == derive_seed(7, tag_hash("hazard")));
}

TEST_CASE("keyed substreams do not collide over a small grid of keys") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 64; ++a)
        for (std::uint64_t b = 0; b < 64; ++b) seen.insert(derive_seed(1, a, b));
    CHECK(seen.size() == 64 * 64);
}

TEST_CASE("uniform draws lie in [0, 1) and average one half") {
    Rng rng(123);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // sd of the mean is sqrt(1/12 / n) ~ 0.0009
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("tag_hash matches FNV-1a reference values") {
    CHECK(tag_hash("") == 0xcbf29ce484222325ULL);
    CHECK(tag_hash("a") == 0xaf63dc4c8601ec8cULL);
}

}
