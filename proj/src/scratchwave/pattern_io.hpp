#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scratchwave/scratch.hpp"

namespace scratchwave {

// Native pattern format: one segment per line,
//   x0 y0 x1 y1 width depth profile
// in meters, profile one of {rect, tri}; '#' starts a comment.
std::vector<ScratchSegment> parse_pattern_text(std::string_view text);
std::string format_pattern_text(std::span<const ScratchSegment> segments);

std::vector<ScratchSegment> load_pattern_file(const std::filesystem::path& path);
void save_pattern_file(const std::filesystem::path& path, std::span<const ScratchSegment> segments);

// SVG subset: <line>, <polyline>, and <path> with absolute M/L/Z commands.
// The root <svg> must carry data-meters-per-unit. Each element may set
// data-width and data-depth (meters) and data-profile (rect|tri).
std::vector<ScratchSegment> parse_vector_pattern(std::string_view document);

inline constexpr double kDefaultSvgWidth = 1e-6;
inline constexpr double kDefaultSvgDepth = 0.125e-6;

}  // namespace scratchwave
