#include "rwcalc/coin_source.hpp"

#include <charconv>

#include "rwcalc/errors.hpp"

namespace rwcalc {

Seed parse_seed(std::string_view text) {
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        base = 16;
        text.remove_prefix(2);
    }
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw InvalidConfig("seed must be a decimal or 0x-prefixed hex integer");
    return Seed{value};
}

}  // namespace rwcalc
