#ifndef TRACTDYN_CAPS_HPP
#define TRACTDYN_CAPS_HPP

#include <cstdint>
#include <string>

namespace tractdyn {

inline constexpr std::uint64_t kDefaultCellCap = std::uint64_t{1} << 24;

/// Enumeration cap: TRACTABLE_DYN_CELL_CAP when set to a positive integer,
/// kDefaultCellCap otherwise.
std::uint64_t cell_cap();

/// Throws ResourceCapError when required > cell_cap().
void require_within_cap(const std::string &what, std::uint64_t required);

/// base^exponent, saturating at UINT64_MAX.
std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exponent);

} // namespace tractdyn

#endif
