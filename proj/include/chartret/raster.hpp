#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chartret {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rgba {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    std::uint8_t a = 255;
    friend bool operator==(const Rgba&, const Rgba&) = default;
};

/// 8-bit RGBA bitmap, row-major.
class RasterImage {
public:
    RasterImage(std::uint32_t width, std::uint32_t height, Rgba fill = {255, 255, 255, 255});
    /// Takes ownership of `rgba`; its length must be 4 * width * height.
    RasterImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> rgba);

    std::uint32_t width() const noexcept { return width_; }
    std::uint32_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return std::size_t{width_} * height_; }

    Rgba pixel(std::uint32_t x, std::uint32_t y) const;
    void set_pixel(std::uint32_t x, std::uint32_t y, Rgba p);

    std::span<const std::uint8_t> data() const noexcept { return data_; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::uint32_t width_;
    std::uint32_t height_;
    std::vector<std::uint8_t> data_;
};

/// Per-pixel foreground flags; true marks chart content.
class ForegroundMask {
public:
    ForegroundMask(std::uint32_t width, std::uint32_t height, bool value = true);
    ForegroundMask(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> flags);

    std::uint32_t width() const noexcept { return width_; }
    std::uint32_t height() const noexcept { return height_; }

    bool at(std::uint32_t x, std::uint32_t y) const { return flags_[index(x, y)] != 0; }
    bool at(std::size_t i) const { return flags_.at(i) != 0; }
    void set(std::uint32_t x, std::uint32_t y, bool v) { flags_[index(x, y)] = v ? 1 : 0; }

    bool matches(const RasterImage& img) const noexcept {
        return img.width() == width_ && img.height() == height_;
    }
    std::size_t count() const;

    /// Alternating run lengths in row-major order, starting with a
    /// background (false) run, which may be 0.
    std::vector<std::uint32_t> to_rle() const;
    static ForegroundMask from_rle(std::uint32_t width, std::uint32_t height,
                                   std::span<const std::uint32_t> runs);

    friend bool operator==(const ForegroundMask&, const ForegroundMask&) = default;

private:
    std::size_t index(std::uint32_t x, std::uint32_t y) const;

    std::uint32_t width_;
    std::uint32_t height_;
    std::vector<std::uint8_t> flags_;
};

/// Decodes PNG or JPEG bytes (sniffed by signature) to RGBA.
RasterImage decode_image(std::span<const std::uint8_t> bytes);
RasterImage load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const RasterImage& img);
void save_png(const RasterImage& img, const std::filesystem::path& path);

/// Width and height as little-endian u32 followed by the RGBA bytes. Two
/// images with equal canonical bytes are the same input to every provider.
std::vector<std::uint8_t> canonical_bytes(const RasterImage& img);

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes);
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Lowercase hex SHA-256 of canonical_bytes(img).
std::string image_digest(const RasterImage& img);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws std::invalid_argument on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace chartret
