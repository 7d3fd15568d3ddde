#pragma once

#include <cstdint>
#include <filesystem>

namespace scenediff {

// Minimal 8-bit RGB PNG writer (zlib-compressed, filter 0 scanlines).
void write_png(const std::filesystem::path& path, int width, int height,
               const std::uint8_t* rgb);

}  // namespace scenediff
