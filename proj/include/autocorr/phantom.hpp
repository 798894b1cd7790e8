#pragma once

#include <cstdint>
#include <string>

#include "autocorr/grid.hpp"

namespace autocorr {

enum class PhantomKind { TwoDeltas, Bars, Disks, SatelliteLike };

std::string to_string(PhantomKind kind);
PhantomKind parse_phantom_kind(const std::string& text);

/// Deterministic non-negative test object with asymmetric features, values in
/// [0, 1]. Shapes smaller than 8x8 are rejected.
Grid make_phantom(PhantomKind kind, Shape shape, std::uint64_t seed);

}  // namespace autocorr
