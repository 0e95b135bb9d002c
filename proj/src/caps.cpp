#include "tractdyn/caps.hpp"

#include "tractdyn/error.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace tractdyn {

std::uint64_t cell_cap() {
    const char *env = std::getenv("TRACTABLE_DYN_CELL_CAP");
    if (env == nullptr) {
        return kDefaultCellCap;
    }
    std::uint64_t value = 0;
    const char *end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec != std::errc() || ptr != end || value == 0) {
        throw ValidationError(std::string("TRACTABLE_DYN_CELL_CAP must be a positive integer, got '") +
                              env + "'");
    }
    return value;
}

void require_within_cap(const std::string &what, std::uint64_t required) {
    const std::uint64_t allowed = cell_cap();
    if (required > allowed) {
        throw ResourceCapError(what, required, allowed);
    }
}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exponent) {
    constexpr auto max = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t result = 1;
    for (std::uint64_t i = 0; i < exponent; ++i) {
        if (base != 0 && result > max / base) {
            return max;
        }
        result *= base;
    }
    return result;
}

} // namespace tractdyn
