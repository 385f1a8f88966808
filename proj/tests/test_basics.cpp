#include <doctest.h>

#include "mdla/errors.hpp"
#include "mdla/rng.hpp"
#include "mdla/unit_step.hpp"

TEST_CASE("Philox4x32-10 known answers") {
    // Random123 kat_vectors: counter 0, key 0
    mdla::Philox a(0, 0);
    CHECK(a() == 0xe169c58d6627e8d5ull);
    CHECK(a() == 0x9b00dbd8bc57ac4cull);
    // counter and key all ones
    mdla::Philox b(~0ull, ~0ull);
    b.discard_blocks(~0ull);
    CHECK(b() == 0x41c83b0e408f276dull);
    CHECK(b() == 0x6d5451fda20bc7c6ull);
}

TEST_CASE("Philox streams and helpers") {
    mdla::Philox a(7, 1), b(7, 2);
    CHECK(a() != b());
    mdla::Philox c(7, 1), d(7, 1);
    for (int i = 0; i < 10; ++i) CHECK(c() == d());
    mdla::Philox u(1);
    double s = 0;
    for (int i = 0; i < 100000; ++i) {
        double x = u.uniform();
        CHECK_FALSE((x <= 0 || x >= 1));
        s += x;
    }
    CHECK(s / 100000 == doctest::Approx(0.5).epsilon(0.01));
    for (int i = 0; i < 1000; ++i) CHECK(u.below(7) < 7);
    CHECK(mdla::replica_seed(1, 0) != mdla::replica_seed(1, 1));
}

TEST_CASE("UnitStep evaluation") {
    mdla::UnitStep y({1.0, 2.0}, 3.0);
    CHECK(y(0.5) == 0);
    CHECK(y(1.0) == 0);  // left-continuous
    CHECK(y(1.5) == 1);
    CHECK(y(2.5) == 2);
    CHECK(y(3.0) == 2);
    CHECK(y(3.5) == mdla::UnitStep::inf);
    CHECK(y.count(0, 1.5) == 1);
    CHECK(y.horizon() == 3.0);
    CHECK_THROWS_AS(mdla::UnitStep({2.0, 1.0}), mdla::ConfigError);
    CHECK_THROWS_AS(mdla::UnitStep({1.0, 1.0}), mdla::ConfigError);
    mdla::UnitStep none;
    CHECK(none(1e9) == 0);
}
