#include "roll/render.h"

#include <array>
#include <cstdint>
#include <fstream>
#include <vector>

namespace midistring {

namespace {

constexpr int kCellPixels = 4;

struct Rgb {
  uint8_t r, g, b;
};

constexpr Rgb kBackground{16, 16, 24};
// melody, chords, bass, rhythm
constexpr std::array<Rgb, 4> kChannelColors = {
    Rgb{231, 76, 60}, Rgb{46, 204, 113}, Rgb{52, 152, 219}, Rgb{241, 196, 15}};

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

void put_u16le(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

// pixel(x, y) with y = 0 at the top.
template <typename PixelFn>
Result<bool, std::string> write_bmp(const std::string& path, int width,
                                    int height, PixelFn pixel) {
  const int row_bytes = width * 3;
  const int padding = (4 - row_bytes % 4) % 4;
  const uint32_t data_size = static_cast<uint32_t>((row_bytes + padding) * height);

  std::vector<uint8_t> out;
  out.reserve(54 + data_size);
  out.push_back('B');
  out.push_back('M');
  put_u32le(out, 54 + data_size);
  put_u32le(out, 0);
  put_u32le(out, 54);
  put_u32le(out, 40);  // BITMAPINFOHEADER
  put_u32le(out, static_cast<uint32_t>(width));
  put_u32le(out, static_cast<uint32_t>(height));
  put_u16le(out, 1);
  put_u16le(out, 24);
  put_u32le(out, 0);
  put_u32le(out, data_size);
  put_u32le(out, 2835);  // 72 dpi
  put_u32le(out, 2835);
  put_u32le(out, 0);
  put_u32le(out, 0);

  for (int row = height - 1; row >= 0; --row) {  // BMP rows are bottom-up
    for (int x = 0; x < width; ++x) {
      Rgb c = pixel(x, row);
      out.push_back(c.b);
      out.push_back(c.g);
      out.push_back(c.r);
    }
    for (int p = 0; p < padding; ++p) out.push_back(0);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) return "cannot open " + path + " for writing";
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) return "short write to " + path;
  return true;
}

}  // namespace

Result<bool, std::string> render_roll(const RollTensor& roll,
                                      const std::string& path) {
  const int width = kRollSteps * kCellPixels;
  const int height = kRollPitches * kCellPixels;
  return write_bmp(path, width, height, [&](int x, int y) {
    const int step = x / kCellPixels;
    const int pitch = kRollPitches - 1 - y / kCellPixels;  // pitch 0 at bottom
    Rgb color = kBackground;
    for (int channel = kRollChannels - 1; channel >= 0; --channel) {
      if (roll.at(channel, step, pitch)) color = kChannelColors[channel];
    }
    return color;
  });
}

Result<bool, std::string> render_roll(const PhraseRoll& roll,
                                      const std::string& path) {
  const int width = kPhraseSteps * kCellPixels;
  const int height = kRollPitches * kCellPixels;
  return write_bmp(path, width, height, [&](int x, int y) {
    const int step = x / kCellPixels;
    const int pitch = kRollPitches - 1 - y / kCellPixels;
    return roll.at(step, pitch) ? kChannelColors[0] : kBackground;
  });
}

}  // namespace midistring
