#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hyperrag {

struct Rgb {
    uint8_t r = 0;
    uint8_t g = 0;
    uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

// Decoded raster, row-major RGB8. Keeps the rest of the engine independent
// of the codec backend.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {255, 255, 255});

    int width() const { return width_; }
    int height() const { return height_; }
    size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }

    Rgb at(int x, int y) const { return pixels_[static_cast<size_t>(y) * width_ + x]; }
    void set(int x, int y, Rgb c) { pixels_[static_cast<size_t>(y) * width_ + x] = c; }

    void fill_rect(int x, int y, int w, int h, Rgb c);

    const std::vector<Rgb>& pixels() const { return pixels_; }

    // PNG and JPEG. Throw Error(DecodeError) on anything undecodable and on
    // empty rasters.
    static Image decode_file(const std::string& path);
    static Image decode_bytes(const std::vector<uint8_t>& bytes);

    std::vector<uint8_t> encode_png() const;
    void write_png(const std::string& path) const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);

} // namespace hyperrag
