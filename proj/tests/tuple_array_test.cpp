#include "arraylog/tuple_array.hpp"

#include <gtest/gtest.h>

#include <random>

#include "arraylog/ra.hpp"
#include "oracles.hpp"

using namespace arraylog;

TEST(Canonicalize, SortsAndDeduplicates) {
    tuple_array raw(2, {2, 1, 1, 2, 2, 1});
    tuple_array c = canonicalize(raw);
    EXPECT_TRUE(c.canonical);
    EXPECT_EQ(c.data, (std::vector<value_t>{1, 2, 2, 1}));
}

TEST(Canonicalize, EmptyInput) {
    tuple_array raw(1);
    tuple_array c = canonicalize(raw);
    EXPECT_EQ(c.count(), 0u);
    EXPECT_TRUE(c.canonical);
}

TEST(Canonicalize, MatchesSetOracleOnRandomRows) {
    std::mt19937_64 rng(7);
    tuple_array raw = oracles::random_relation(rng, 2, 1000, 10);
    tuple_array c = canonicalize(raw);
    auto expected = oracles::to_set(raw);
    EXPECT_EQ(oracles::to_set(c), expected);
    EXPECT_LE(c.count(), 100u);  // at most |{0..9}^2| distinct rows
    // strictly increasing rows
    for (std::size_t i = 1; i < c.count(); ++i)
        EXPECT_LT(detail::compare_rows(c.data.data() + (i - 1) * 2,
                                       c.data.data() + i * 2, 2),
                  0);
}

TEST(Canonicalize, Idempotent) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        tuple_array raw = oracles::random_relation(rng, 3, 200, 6);
        tuple_array once = canonicalize(raw);
        tuple_array twice = canonicalize(once);
        EXPECT_EQ(once, twice);
    }
}

TEST(Canonicalize, IndependentOfWorkerCount) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        tuple_array raw = oracles::random_relation(rng, 2, 500, 12);
        tuple_array base = canonicalize(raw, 1);
        for (unsigned workers : {2u, 3u, 8u})
            EXPECT_EQ(canonicalize(raw, workers), base);
    }
}

TEST(Permute, SwapsAndResorts) {
    tuple_array rel = canonicalize(tuple_array(2, {1, 2, 3, 1}));
    std::vector<std::uint32_t> perm{1, 0};
    tuple_array p = permute_columns(rel, perm);
    EXPECT_EQ(p.data, (std::vector<value_t>{1, 3, 2, 1}));
}

TEST(Permute, IdentityReturnsSameRows) {
    tuple_array rel = canonicalize(tuple_array(2, {1, 2, 3, 1}));
    std::vector<std::uint32_t> perm{0, 1};
    EXPECT_EQ(permute_columns(rel, perm), rel);
}

TEST(Permute, RoundTripsThroughInverse) {
    std::mt19937_64 rng(17);
    std::vector<std::uint32_t> perm{2, 0, 1};
    std::vector<std::uint32_t> inverse{1, 2, 0};
    for (int trial = 0; trial < 20; ++trial) {
        tuple_array rel =
            canonicalize(oracles::random_relation(rng, 3, 100, 8));
        tuple_array back =
            permute_columns(permute_columns(rel, perm), inverse);
        EXPECT_EQ(back, rel);
    }
}

TEST(Permute, RejectsNonBijections) {
    tuple_array rel = canonicalize(tuple_array(2, {1, 2}));
    std::vector<std::uint32_t> dup{0, 0};
    std::vector<std::uint32_t> oob{0, 2};
    std::vector<std::uint32_t> short_perm{0};
    EXPECT_THROW(permute_columns(rel, dup), config_error);
    EXPECT_THROW(permute_columns(rel, oob), config_error);
    EXPECT_THROW(permute_columns(rel, short_perm), config_error);
}

TEST(TupleArray, RejectsRaggedData) {
    EXPECT_THROW(tuple_array(2, {1, 2, 3}), std::logic_error);
    EXPECT_THROW(tuple_array(0, {}), std::logic_error);
}
