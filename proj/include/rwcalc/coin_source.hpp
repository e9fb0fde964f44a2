#pragma once

// Counter-based source of i.i.d. fair +-1 coins, organized as an infinite
// matrix: row m holds the coins that drive the level-m walk. Every entry is
// a pure function of (seed, row, index), so any coin can be produced in any
// order without storing the others.

#include <cassert>
#include <cstdint>
#include <string>
#include <string_view>

namespace rwcalc {

struct Seed {
    std::uint64_t value = 0;

    friend bool operator==(Seed a, Seed b) { return a.value == b.value; }
    friend bool operator!=(Seed a, Seed b) { return a.value != b.value; }
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace detail

class CoinMatrix {
  public:
    explicit CoinMatrix(Seed seed) : seed_(seed) {}

    Seed seed() const { return seed_; }

    // Precomputed per-row state, for hot loops that walk one row.
    class Row {
      public:
        // index k >= 1; +1 or -1
        int at(std::uint64_t k) const {
            std::uint64_t h = detail::mix64(key_ + detail::kGolden * k);
            return 1 - 2 * static_cast<int>(h >> 63);
        }

      private:
        friend class CoinMatrix;
        explicit Row(std::uint64_t key) : key_(key) {}
        std::uint64_t key_;
    };

    Row row(std::uint32_t m) const {
        return Row(detail::mix64(seed_.value + detail::kGolden * (std::uint64_t(m) + 1)));
    }

    // Entry X_m(k), k >= 1.
    int coin(std::uint32_t m, std::uint64_t k) const {
        assert(k >= 1);
        return row(m).at(k);
    }

  private:
    Seed seed_;
};

// Independent seed for replication r of an experiment run under `base`.
// Mixed, not incremented, so nearby replications share no structure.
inline Seed derive_seed(Seed base, std::uint64_t replication) {
    return Seed{detail::mix64(detail::mix64(base.value + detail::kGolden) +
                              detail::kGolden * (replication + 1))};
}

// Accepts decimal ("12345") or hex with 0x prefix ("0xDEADBEEF").
Seed parse_seed(std::string_view text);

}  // namespace rwcalc
