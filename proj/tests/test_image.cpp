#include <fstream>

#include <doctest.h>

#include "styleaudit/errors.hpp"
#include "styleaudit/image.hpp"

#include "testutil.hpp"

using namespace styleaudit;

TEST_CASE("png round trip preserves pixels") {
    testutil::ScratchDir dir("png");
    const ImageU8 img = testutil::noise_image(37, 5);
    const auto path = dir.path / "img.png";
    save_png(img, path);
    const ImageU8 back = load_image(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    REQUIRE(back.pixels == img.pixels);
}

TEST_CASE("corrupt file raises DecodeFailure") {
    testutil::ScratchDir dir("corrupt");
    const auto path = dir.path / "bad.png";
    std::ofstream(path) << "not an image at all";
    REQUIRE_THROWS_AS(load_image(path), DecodeFailure);

    // Truncated PNG: valid signature, cut off mid-stream.
    const ImageU8 img = testutil::noise_image(64, 6);
    const auto full = dir.path / "full.png";
    save_png(img, full);
    std::ifstream in(full, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    const auto cut = dir.path / "cut.png";
    std::ofstream(cut, std::ios::binary)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    REQUIRE_THROWS_AS(load_image(cut), DecodeFailure);
}

TEST_CASE("bilinear resize: identity and constant images") {
    const ImageU8 img = testutil::noise_image(24, 7);
    const ImageU8 same = resize_bilinear(img, 24, 24);
    REQUIRE(same.pixels == img.pixels);

    ImageU8 flat(16, 16, 200);
    const ImageU8 up = resize_bilinear(flat, 40, 40);
    for (const auto px : up.pixels) REQUIRE(px == 200);
}

TEST_CASE("hsv round trip") {
    for (const auto& rgb : {std::array<float, 3>{0.2f, 0.4f, 0.8f},
                            std::array<float, 3>{0.9f, 0.1f, 0.1f},
                            std::array<float, 3>{0.5f, 0.5f, 0.5f}}) {
        const auto hsv = rgb_to_hsv(rgb[0], rgb[1], rgb[2]);
        const auto back = hsv_to_rgb(hsv[0], hsv[1], hsv[2]);
        for (int c = 0; c < 3; ++c)
            REQUIRE(back[c] == doctest::Approx(rgb[c]).epsilon(1e-5));
    }
}
