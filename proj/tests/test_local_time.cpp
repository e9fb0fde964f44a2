#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <span>
#include <vector>

#include "rwcalc/embedding.hpp"
#include "rwcalc/errors.hpp"
#include "rwcalc/local_time.hpp"
#include "rwcalc/walks.hpp"

using namespace rwcalc;

namespace {

const std::vector<std::int32_t> kZigzag{0, 1, 0, 1, 2, 1, 0, -1, 0};

LocalTimeField field_of(Direction d, std::int64_t steps = 8, std::uint32_t level = 1) {
    return LocalTimeField(level, 0.0, d, std::span<const std::int32_t>(kZigzag), steps);
}

}  // namespace

TEST_CASE("event lists record crossings at the departure site") {
    LocalTimeField up = field_of(Direction::Up);
    LocalTimeField down = field_of(Direction::Down);

    CHECK(up.x_min() == -1);
    CHECK(up.x_max() == 2);

    auto same = [](std::span<const std::uint32_t> got, std::vector<std::uint32_t> want) {
        return std::vector<std::uint32_t>(got.begin(), got.end()) == want;
    };
    CHECK(same(up.events(Direction::Up, 0), {0, 2}));
    CHECK(same(up.events(Direction::Up, 1), {3}));
    CHECK(same(up.events(Direction::Up, -1), {7}));
    CHECK(same(up.events(Direction::Up, 2), {}));
    CHECK(same(down.events(Direction::Down, 1), {1, 5}));
    CHECK(same(down.events(Direction::Down, 2), {4}));
    CHECK(same(down.events(Direction::Down, 0), {6}));
    CHECK(same(down.events(Direction::Down, 99), {}));
    CHECK_THROWS_AS(up.events(Direction::Both, 0), InvalidConfig);
}

TEST_CASE("count_before respects the field direction and the cutoff") {
    LocalTimeField up = field_of(Direction::Up);
    LocalTimeField down = field_of(Direction::Down);
    LocalTimeField both = field_of(Direction::Both);

    CHECK(up.count_before(0, 1) == 1);
    CHECK(up.count_before(0, 3) == 2);
    CHECK(up.count_before(0, 0) == 0);
    CHECK(down.count_before(1, 6) == 2);
    CHECK(down.count_before(1, 5) == 1);
    CHECK(both.count_before(0, 8) == 3);   // up at 0, 2; down at 6
    CHECK(both.count_before(5, 8) == 0);   // outside the range
    CHECK(both.count_before(0, -3) == 0);
}

TEST_CASE("every step is exactly one event") {
    LocalTimeField both = field_of(Direction::Both);
    for (std::int64_t k = 0; k <= 8; ++k) {
        std::int64_t total = 0;
        for (std::int64_t x = both.x_min(); x <= both.x_max(); ++x)
            total += both.count_before(x, k);
        CHECK(total == k);
    }
}

TEST_CASE("value_at_grid scales counts by 2^-level") {
    LocalTimeField both = field_of(Direction::Both);
    CHECK(both.value_at_grid(8, 0) == 1.5);   // 3 events * 0.5
    CHECK(both.value_at_grid(3, 0) == 1.0);
    CHECK(both.value_at_grid(100, 0) == 1.5);  // clamped to the step count
}

TEST_CASE("bilinear evaluation between grid corners") {
    LocalTimeField up = field_of(Direction::Up);
    // level 1: dt = 0.25, dx = 0.5; halfway in both time and space
    CHECK(up.evaluate(0.125, 0.25) == 0.125);
    CHECK(up.evaluate(0.25, 0.0) == 0.5);       // exactly on the grid
    CHECK(up.evaluate(100.0, 0.0) == 1.0);      // frozen past the horizon
    CHECK(up.evaluate(0.25, 10.0) == 0.0);      // outside the visited range
    CHECK(up.evaluate(-1.0, 0.0) == 0.0);
}

TEST_CASE("a shorter step count ignores later transitions") {
    LocalTimeField up = field_of(Direction::Up, 2);
    CHECK(up.count_before(0, 8) == 1);  // only transition 0 counted (j < 2)
    CHECK(up.step_count() == 2);
}

TEST_CASE("field construction validates its input") {
    CHECK_THROWS_AS(field_of(Direction::Both, 9), InvalidConfig);
    CHECK_THROWS_AS(field_of(Direction::Both, -1), InvalidConfig);
    std::vector<std::int32_t> jump{0, 2};
    CHECK_THROWS_AS(LocalTimeField(1, 0.0, Direction::Both,
                                   std::span<const std::int32_t>(jump), 1),
                    InvalidConfig);
    LocalTimeField empty = field_of(Direction::Both, 0);
    CHECK(empty.count_before(0, 5) == 0);
    CHECK(empty.evaluate(1.0, 0.0) == 0.0);
}

TEST_CASE("walk and embedded-walk constructors agree") {
    CoinMatrix coins(Seed{606});
    NestedWalks fam = build_nested(coins, 5, 0.5);
    EmbeddedWalk emb = embed_nested(fam, 3);
    LocalTimeField from_walk = discrete_local_time(fam.level(3), Direction::Both, 0.5);
    LocalTimeField from_emb = discrete_local_time(emb, Direction::Both, 0.5);

    // the composed embedding reproduces the level-3 walk values, so the
    // crossing counts must be identical wherever both fields are defined
    REQUIRE(from_walk.step_count() == from_emb.step_count());
    for (std::int64_t x = from_walk.x_min(); x <= from_walk.x_max(); ++x)
        CHECK(from_walk.count_before(x, from_walk.step_count()) ==
              from_emb.count_before(x, from_emb.step_count()));
}

TEST_CASE("horizon truncates the counted steps") {
    CoinMatrix coins(Seed{607});
    NestedWalks fam = build_nested(coins, 4, 1.0);
    LocalTimeField full = discrete_local_time(fam.level(4), Direction::Both, 1.0);
    LocalTimeField half = discrete_local_time(fam.level(4), Direction::Both, 0.5);
    CHECK(full.step_count() == 256);
    CHECK(half.step_count() == 128);
    CHECK(half.duration() == 0.5);
}

TEST_CASE("up-crossings of an edge pair with down-crossings from above") {
    CoinMatrix coins(Seed{608});
    NestedWalks fam = build_nested(coins, 4, 1.0);
    LocalTimeField up = discrete_local_time(fam.level(4), Direction::Up, 1.0);
    LocalTimeField down = discrete_local_time(fam.level(4), Direction::Down, 1.0);
    std::int64_t k = up.step_count();
    for (std::int64_t x = up.x_min() - 1; x <= up.x_max() + 1; ++x) {
        std::int64_t diff = up.count_before(x, k) - down.count_before(x + 1, k);
        // consecutive crossings of one edge alternate in direction
        CHECK(diff >= -1);
        CHECK(diff <= 1);
        if (x >= 0) CHECK(diff >= 0);  // the walk starts below these edges
    }
}

TEST_CASE("total crossing mass at any cutoff equals the step count") {
    CoinMatrix coins(Seed{609});
    NestedWalks fam = build_nested(coins, 5, 1.0);
    LocalTimeField both = discrete_local_time(fam.level(5), Direction::Both, 1.0);
    for (std::int64_t k : {7, 128, 511, 1024}) {
        std::int64_t total = 0;
        for (std::int64_t x = both.x_min(); x <= both.x_max(); ++x)
            total += both.count_before(x, k);
        CHECK(total == std::min<std::int64_t>(k, both.step_count()));
    }
}
