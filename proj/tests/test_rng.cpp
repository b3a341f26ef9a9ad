#include "pfdet/rng.hpp"

#include <cmath>
#include <doctest.h>

using pfdet::Rng;

TEST_CASE("same seed reproduces the same stream") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different substreams of one master seed diverge") {
    Rng a(pfdet::derive_seed(7, 0));
    Rng b(pfdet::derive_seed(7, 1));
    int equal = 0;
    for (int i = 0; i < 64; ++i) equal += a.next_u64() == b.next_u64();
    CHECK(equal == 0);
}

TEST_CASE("uniform01 stays in [0,1) and uniform_symmetric in (-1/2,1/2)") {
    Rng rng(5);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double s = rng.uniform_symmetric();
        CHECK(s > -0.5);
        CHECK(s < 0.5);
    }
}

TEST_CASE("normal() has zero mean and unit variance") {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.01);
    CHECK(std::fabs(var - 1.0) < 0.02);
}
