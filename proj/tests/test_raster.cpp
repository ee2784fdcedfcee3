#include <doctest.h>

#include "chartret/errors.hpp"
#include "chartret/raster.hpp"
#include "chartret/rng.hpp"
#include "support.hpp"

using namespace chartret;

namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

} // namespace

TEST_CASE("raster construction and pixels") {
    RasterImage img(3, 2, Rgba{1, 2, 3, 4});
    CHECK(img.pixel_count() == 6);
    CHECK(img.pixel(2, 1) == Rgba{1, 2, 3, 4});
    img.set_pixel(0, 1, {9, 9, 9, 255});
    CHECK(img.pixel(0, 1) == Rgba{9, 9, 9, 255});
    CHECK_THROWS_AS(img.pixel(3, 0), std::out_of_range);
    CHECK_THROWS_AS(RasterImage(0, 5), std::invalid_argument);
    CHECK_THROWS_AS(RasterImage(2, 2, std::vector<std::uint8_t>(15)), std::invalid_argument);
}

TEST_CASE("mask run-length encoding") {
    ForegroundMask m(4, 2, false);
    CHECK(m.to_rle() == std::vector<std::uint32_t>{8});
    m.set(0, 0, true);
    m.set(1, 0, true);
    m.set(3, 1, true);
    CHECK(m.to_rle() == std::vector<std::uint32_t>{0, 2, 5, 1});
    CHECK(ForegroundMask::from_rle(4, 2, m.to_rle()) == m);
    CHECK(ForegroundMask(3, 3, true).to_rle() == std::vector<std::uint32_t>{0, 9});
    CHECK_THROWS_AS(ForegroundMask::from_rle(4, 2, std::vector<std::uint32_t>{3, 3}), std::invalid_argument);
    CHECK_THROWS_AS(ForegroundMask::from_rle(4, 2, std::vector<std::uint32_t>{9}), std::invalid_argument);

    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        const auto w = static_cast<std::uint32_t>(1 + rng.below(20));
        const auto h = static_cast<std::uint32_t>(1 + rng.below(20));
        ForegroundMask r(w, h, false);
        for (std::uint32_t y = 0; y < h; ++y) {
            for (std::uint32_t x = 0; x < w; ++x) r.set(x, y, rng.chance(0.4));
        }
        CHECK(ForegroundMask::from_rle(w, h, r.to_rle()) == r);
    }
}

TEST_CASE("PNG round trip is lossless") {
    Rng rng(4);
    RasterImage img(17, 9);
    for (std::uint32_t y = 0; y < 9; ++y) {
        for (std::uint32_t x = 0; x < 17; ++x) {
            img.set_pixel(x, y, {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                                 static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256))});
        }
    }
    const auto png = encode_png(img);
    CHECK(decode_image(png) == img);

    testsupport::TempDir dir("raster");
    save_png(img, dir / "a.png");
    CHECK(load_image(dir / "a.png") == img);
    CHECK(image_digest(load_image(dir / "a.png")) == image_digest(img));
}

TEST_CASE("decoding rejects corrupt input") {
    CHECK_THROWS_AS(decode_image(bytes_of("definitely not an image")), ImageDecodeError);
    CHECK_THROWS_AS(decode_image(std::vector<std::uint8_t>{}), ImageDecodeError);
    auto png = encode_png(RasterImage(8, 8));
    png.resize(png.size() / 2);
    CHECK_THROWS_AS(decode_image(png), ImageDecodeError);
    std::vector<std::uint8_t> fake_jpeg{0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10, 'J', 'F', 'I', 'F'};
    CHECK_THROWS_AS(decode_image(fake_jpeg), ImageDecodeError);
}

TEST_CASE("canonical bytes and digests") {
    RasterImage img(2, 1, Rgba{10, 20, 30, 40});
    const auto c = canonical_bytes(img);
    CHECK(c == std::vector<std::uint8_t>{2, 0, 0, 0, 1, 0, 0, 0, 10, 20, 30, 40, 10, 20, 30, 40});
    // FIPS 180-2 test vector
    CHECK(to_hex(sha256(bytes_of("abc"))) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(image_digest(img) == to_hex(sha256(c)));
    CHECK(image_digest(RasterImage(1, 2, Rgba{10, 20, 30, 40})) != image_digest(img));
}

TEST_CASE("base64") {
    // RFC 4648 test vectors
    CHECK(base64_encode(bytes_of("")) == "");
    CHECK(base64_encode(bytes_of("f")) == "Zg==");
    CHECK(base64_encode(bytes_of("fo")) == "Zm8=");
    CHECK(base64_encode(bytes_of("foobar")) == "Zm9vYmFy");
    CHECK(base64_decode("Zm9vYg==") == bytes_of("foob"));
    CHECK(base64_decode("Zm9vYmE=") == bytes_of("fooba"));
    CHECK(base64_decode("") == bytes_of(""));
    CHECK_THROWS_AS(base64_decode("Zm9v!"), std::invalid_argument);
    CHECK_THROWS_AS(base64_decode("Zm9"), std::invalid_argument);

    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::uint8_t> data(rng.below(70));
        for (auto& b : data) b = static_cast<std::uint8_t>(rng.below(256));
        CHECK(base64_decode(base64_encode(data)) == data);
    }
}
