#include "chartret/raster.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <jpeglib.h>
#include <openssl/evp.h>
#include <openssl/sha.h>
#include <png.h>

#include "chartret/errors.hpp"

namespace chartret {

namespace {

void check_dims(std::uint32_t width, std::uint32_t height) {
    if (width == 0 || height == 0) {
        throw std::invalid_argument("image dimensions must be positive");
    }
}

} // namespace

RasterImage::RasterImage(std::uint32_t width, std::uint32_t height, Rgba fill)
    : width_(width), height_(height) {
    check_dims(width, height);
    data_.resize(pixel_count() * 4);
    for (std::size_t i = 0; i < pixel_count(); ++i) {
        data_[4 * i + 0] = fill.r;
        data_[4 * i + 1] = fill.g;
        data_[4 * i + 2] = fill.b;
        data_[4 * i + 3] = fill.a;
    }
}

RasterImage::RasterImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> rgba)
    : width_(width), height_(height), data_(std::move(rgba)) {
    check_dims(width, height);
    if (data_.size() != pixel_count() * 4) {
        throw std::invalid_argument("RGBA buffer length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(width) + "x" +
                                    std::to_string(height));
    }
}

Rgba RasterImage::pixel(std::uint32_t x, std::uint32_t y) const {
    if (x >= width_ || y >= height_) throw std::out_of_range("pixel outside image");
    const auto* p = &data_[(std::size_t{y} * width_ + x) * 4];
    return {p[0], p[1], p[2], p[3]};
}

void RasterImage::set_pixel(std::uint32_t x, std::uint32_t y, Rgba p) {
    if (x >= width_ || y >= height_) throw std::out_of_range("pixel outside image");
    auto* d = &data_[(std::size_t{y} * width_ + x) * 4];
    d[0] = p.r;
    d[1] = p.g;
    d[2] = p.b;
    d[3] = p.a;
}

ForegroundMask::ForegroundMask(std::uint32_t width, std::uint32_t height, bool value)
    : width_(width), height_(height), flags_(std::size_t{width} * height, value ? 1 : 0) {
    check_dims(width, height);
}

ForegroundMask::ForegroundMask(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> flags)
    : width_(width), height_(height), flags_(std::move(flags)) {
    check_dims(width, height);
    if (flags_.size() != std::size_t{width} * height) {
        throw std::invalid_argument("mask length does not match its dimensions");
    }
    for (auto& f : flags_) f = f ? 1 : 0;
}

std::size_t ForegroundMask::index(std::uint32_t x, std::uint32_t y) const {
    if (x >= width_ || y >= height_) throw std::out_of_range("mask coordinate outside mask");
    return std::size_t{y} * width_ + x;
}

std::size_t ForegroundMask::count() const {
    std::size_t n = 0;
    for (auto f : flags_) n += f;
    return n;
}

std::vector<std::uint32_t> ForegroundMask::to_rle() const {
    std::vector<std::uint32_t> runs;
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (auto f : flags_) {
        if (f == current) {
            ++run;
        } else {
            runs.push_back(run);
            current = f;
            run = 1;
        }
    }
    runs.push_back(run);
    return runs;
}

ForegroundMask ForegroundMask::from_rle(std::uint32_t width, std::uint32_t height,
                                        std::span<const std::uint32_t> runs) {
    check_dims(width, height);
    const std::size_t total = std::size_t{width} * height;
    std::vector<std::uint8_t> flags;
    flags.reserve(total);
    std::uint8_t value = 0;
    for (auto run : runs) {
        if (flags.size() + run > total) throw std::invalid_argument("mask RLE overruns its dimensions");
        flags.insert(flags.end(), run, value);
        value ^= 1;
    }
    if (flags.size() != total) throw std::invalid_argument("mask RLE does not cover its dimensions");
    return ForegroundMask(width, height, std::move(flags));
}

// ---------------------------------------------------------------------------
// Codecs
// ---------------------------------------------------------------------------

namespace {

bool is_png(std::span<const std::uint8_t> b) {
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
    return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw ImageDecodeError(std::string("PNG: ") + image.message);
    }
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw ImageDecodeError("PNG: " + msg);
    }
    return RasterImage(image.width, image.height, std::move(rgba));
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// Only trivially destructible locals live across the setjmp.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& rgb,
                     std::uint32_t& width, std::uint32_t& height, char* message) {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        std::memcpy(message, err.message, JMSG_LENGTH_MAX);
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = cinfo.output_width;
    height = cinfo.output_height;
    rgb.resize(std::size_t{width} * height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = rgb.data() + std::size_t{cinfo.output_scanline} * width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

RasterImage decode_jpeg(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> rgb;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    char message[JMSG_LENGTH_MAX] = {};
    if (!decode_jpeg_raw(bytes, rgb, width, height, message)) {
        throw ImageDecodeError(std::string("JPEG: ") + message);
    }
    if (width == 0 || height == 0) throw ImageDecodeError("JPEG: empty image");
    std::vector<std::uint8_t> rgba(std::size_t{width} * height * 4);
    for (std::size_t i = 0; i < std::size_t{width} * height; ++i) {
        rgba[4 * i + 0] = rgb[3 * i + 0];
        rgba[4 * i + 1] = rgb[3 * i + 1];
        rgba[4 * i + 2] = rgb[3 * i + 2];
        rgba[4 * i + 3] = 255;
    }
    return RasterImage(width, height, std::move(rgba));
}

} // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes)) return decode_png(bytes);
    if (is_jpeg(bytes)) return decode_jpeg(bytes);
    throw ImageDecodeError("unrecognized image format (expected PNG or JPEG)");
}

RasterImage load_image(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    try {
        return decode_image(bytes);
    } catch (const ImageDecodeError& e) {
        throw ImageDecodeError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = img.width();
    image.height = img.height();
    image.format = PNG_FORMAT_RGBA;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data().data(), 0, nullptr)) {
        throw std::runtime_error(std::string("PNG encode: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data().data(), 0, nullptr)) {
        throw std::runtime_error(std::string("PNG encode: ") + image.message);
    }
    out.resize(size);
    return out;
}

void save_png(const RasterImage& img, const std::filesystem::path& path) {
    write_file_bytes(path, encode_png(img));
}

// ---------------------------------------------------------------------------
// Hashing and transport helpers
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> canonical_bytes(const RasterImage& img) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + img.data().size());
    for (auto v : {img.width(), img.height()}) {
        for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
    }
    out.insert(out.end(), img.data().begin(), img.data().end());
    return out;
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes) {
    std::array<std::uint8_t, 32> out{};
    SHA256(bytes.data(), bytes.size(), out.data());
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

std::string image_digest(const RasterImage& img) {
    return to_hex(sha256(canonical_bytes(img)));
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::string clean;
    clean.reserve(text.size());
    for (char c : text) {
        if (c != '\n' && c != '\r' && c != ' ' && c != '\t') clean.push_back(c);
    }
    if (clean.size() % 4 != 0) throw std::invalid_argument("base64: length is not a multiple of 4");
    if (clean.empty()) return {};
    std::vector<std::uint8_t> out(clean.size() / 4 * 3);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                  static_cast<int>(clean.size()));
    if (n < 0) throw std::invalid_argument("base64: malformed input");
    std::size_t padding = 0;
    if (clean.back() == '=') ++padding;
    if (clean.size() >= 2 && clean[clean.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + path.string());
}

} // namespace chartret
