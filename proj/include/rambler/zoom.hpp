#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "rambler/error.hpp"

namespace rambler {

enum class ZoomLevel { Full, Half, Quarter, Gist };

inline constexpr std::array<ZoomLevel, 3> kSummaryLevels = {ZoomLevel::Half, ZoomLevel::Quarter, ZoomLevel::Gist};

inline std::string_view to_string(ZoomLevel level) {
    switch (level) {
        case ZoomLevel::Full: return "full";
        case ZoomLevel::Half: return "half";
        case ZoomLevel::Quarter: return "quarter";
        case ZoomLevel::Gist: return "gist";
    }
    return "full";
}

inline std::optional<ZoomLevel> parse_zoom_level(std::string_view s) {
    if (s == "full") return ZoomLevel::Full;
    if (s == "half") return ZoomLevel::Half;
    if (s == "quarter") return ZoomLevel::Quarter;
    if (s == "gist") return ZoomLevel::Gist;
    return std::nullopt;
}

inline ZoomLevel require_zoom_level(std::string_view s) {
    auto level = parse_zoom_level(s);
    if (!level) fail(ErrorCode::BadRequest, "unknown zoom level '" + std::string(s) + "' (expected full|half|quarter|gist)");
    return *level;
}

/// Word budget for a level given the source length L (in words).
/// GIST honors both the 10% reading and the 5-word floor.
inline std::size_t word_budget(ZoomLevel level, std::size_t source_words) {
    std::size_t L = std::max<std::size_t>(source_words, 1);
    switch (level) {
        case ZoomLevel::Full: return L;
        case ZoomLevel::Half: return (L + 1) / 2;
        case ZoomLevel::Quarter: return (L + 3) / 4;
        case ZoomLevel::Gist: return std::max<std::size_t>(5, (L + 9) / 10);
    }
    return L;
}

}  // namespace rambler
