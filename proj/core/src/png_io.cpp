#include "scenediff/png_io.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

#include "scenediff/common.hpp"

namespace scenediff {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::ofstream& os, const char type[4], const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> head;
  put_u32(head, static_cast<std::uint32_t>(data.size()));
  os.write(reinterpret_cast<const char*>(head.data()), 4);
  os.write(type, 4);
  if (!data.empty()) os.write(reinterpret_cast<const char*>(data.data()), data.size());
  std::uint32_t crc = crc32(0, reinterpret_cast<const Bytef*>(type), 4);
  if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
  std::vector<std::uint8_t> tail;
  put_u32(tail, crc);
  os.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace

void write_png(const std::filesystem::path& path, int width, int height,
               const std::uint8_t* rgb) {
  check(width > 0 && height > 0, "write_png: bad dimensions");
  std::ofstream os(path, std::ios::binary);
  check(os.good(), "write_png: cannot open " + path.string());

  static const std::array<std::uint8_t, 8> kSignature = {137, 80, 78, 71, 13, 10, 26, 10};
  os.write(reinterpret_cast<const char*>(kSignature.data()), kSignature.size());

  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  put_chunk(os, "IHDR", ihdr);

  // filter byte 0 in front of every scanline
  const size_t stride = static_cast<size_t>(width) * 3;
  std::vector<std::uint8_t> raw((stride + 1) * static_cast<size_t>(height));
  for (int y = 0; y < height; ++y) {
    raw[(stride + 1) * y] = 0;
    std::memcpy(raw.data() + (stride + 1) * y + 1, rgb + stride * y, stride);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(bound);
  check(compress2(packed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) == Z_OK,
        "write_png: compression failed");
  packed.resize(bound);
  put_chunk(os, "IDAT", packed);
  put_chunk(os, "IEND", {});
  check(os.good(), "write_png: write failed for " + path.string());
}

}  // namespace scenediff
