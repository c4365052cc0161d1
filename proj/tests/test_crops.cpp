#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "salco/crops.hpp"
#include "salco/error.hpp"

using namespace salco;

TEST_SUITE("crops") {

TEST_CASE("unit stride maps grid boxes to themselves") {
    const PixelBox px = grid_box_to_pixels({2, 3, 5, 7}, 1, 10, 10);
    CHECK(px == PixelBox{2, 3, 5, 7});
}

TEST_CASE("one cell at stride 8 covers an 8x8 pixel block") {
    const PixelBox px = grid_box_to_pixels({0, 0, 0, 0}, 8, 64, 64);
    CHECK(px == PixelBox{0, 0, 7, 7});
}

TEST_CASE("edge boxes clip to image bounds") {
    // 2x2 grid at stride 8 over a 13x10 image: last cell clips.
    const PixelBox px = grid_box_to_pixels({0, 0, 1, 1}, 8, 13, 10);
    CHECK(px == PixelBox{0, 0, 12, 9});
}

TEST_CASE("degenerate 1x1 box crops itself") {
    Rng rng(5);
    const CropSpec spec = random_crop_in_box({4, 9, 4, 9}, rng);
    CHECK(spec.top == 4);
    CHECK(spec.left == 9);
    CHECK(spec.height == 1);
    CHECK(spec.width == 1);
}

TEST_CASE("area and aspect bounds hold over 10000 seeded crops") {
    const PixelBox box{0, 0, 99, 99};
    const double box_area = 100.0 * 100.0;
    for (uint64_t seed = 0; seed < 10000; ++seed) {
        Rng rng(seed);
        const CropSpec s = random_crop_in_box(box, rng);
        CHECK(s.top >= box.top);
        CHECK(s.left >= box.left);
        CHECK(s.top + s.height - 1 <= box.bottom);
        CHECK(s.left + s.width - 1 <= box.right);

        const double h = s.height, w = s.width;
        const double area_frac = h * w / box_area;
        // +-1 pixel rounding slack on each extent.
        CHECK(area_frac <= 1.0);
        CHECK(h * w >= 0.08 * box_area - (h + w) - 1.0);
        CHECK((w + 0.5) / (h - 0.5) >= 3.0 / 4.0);
        CHECK((w - 0.5) / (h + 0.5) <= 4.0 / 3.0);
    }
}

TEST_CASE("crop draw is deterministic per seed") {
    const PixelBox box{3, 3, 60, 80};
    Rng a(42), b(42);
    CHECK(random_crop_in_box(box, a) == random_crop_in_box(box, b));
}

TEST_CASE("pairs from a one-cell region are single-stride patches") {
    Region r;
    r.id = 0;
    r.cells = {{1, 1}};
    r.bbox = {1, 1, 1, 1};
    r.score = 0.5f;
    ImageTensor img(32, 32, 3);
    Rng rng(3);
    const CropPair pair = make_pair(r, 8, img, rng);
    CHECK(pair.first.top >= 8);
    CHECK(pair.first.top + pair.first.height <= 16);
    CHECK(pair.first.left >= 8);
    CHECK(pair.first.left + pair.first.width <= 16);
    CHECK(pair.score == 0.5f);
    CHECK(pair.source_region == 0);
}

TEST_CASE("pair construction is deterministic and score passes through") {
    Region r;
    r.id = 2;
    r.cells = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    r.bbox = {0, 0, 1, 1};
    r.score = 0.75f;
    ImageTensor img(64, 64, 3);
    Rng a(7), b(7);
    const CropPair pa = make_pair(r, 8, img, a);
    const CropPair pb = make_pair(r, 8, img, b);
    CHECK(pa.first == pb.first);
    CHECK(pa.second == pb.second);
    CHECK(pa.score == r.score);
}

TEST_CASE("both crops stay inside the region pixel box over 10000 pairs") {
    Region r;
    r.id = 0;
    r.cells = {{2, 3}, {2, 4}, {3, 3}, {3, 4}};
    r.bbox = {2, 3, 3, 4};
    r.score = 1.0f;
    ImageTensor img(128, 128, 3);
    const PixelBox box = grid_box_to_pixels(r.bbox, 8, 128, 128);
    Rng rng(99);
    for (int it = 0; it < 10000; ++it) {
        const CropPair pair = make_pair(r, 8, img, rng);
        for (const CropSpec& s : {pair.first, pair.second}) {
            CHECK(s.top >= box.top);
            CHECK(s.left >= box.left);
            CHECK(s.top + s.height - 1 <= box.bottom);
            CHECK(s.left + s.width - 1 <= box.right);
        }
    }
}

TEST_CASE("full-image view with noise off is plain resize") {
    std::mt19937 gen(17);
    const ImageTensor img = oracle::random_image(24, 24, 3, gen);
    const CropSpec spec{0, 0, 24, 24, false, 0};
    const ImageTensor view = extract_view(img, spec, 16, 0.0f);
    CHECK(view == bilinear_resize(img, 16, 16));
}

TEST_CASE("flipping twice restores the view") {
    std::mt19937 gen(19);
    const ImageTensor img = oracle::random_image(16, 16, 3, gen);
    CropSpec spec{0, 0, 16, 16, true, 0};
    const ImageTensor once = extract_view(img, spec, 16, 0.0f);
    // Flip the flipped view again via a fresh tensor round.
    ImageTensor flipped_img = once;
    const ImageTensor twice = extract_view(flipped_img, spec, 16, 0.0f);
    CHECK(twice == extract_view(img, CropSpec{0, 0, 16, 16, false, 0}, 16, 0.0f));
}

TEST_CASE("noise stays within six sigma on a constant image") {
    ImageTensor img(100, 100, 1);
    std::fill(img.data.begin(), img.data.end(), 0.5f);
    const CropSpec spec{0, 0, 100, 100, false, 4242};
    const ImageTensor view = extract_view(img, spec, 100, 0.02f);
    for (float v : view.data) CHECK(std::abs(v - 0.5f) <= 6.0f * 0.02f);
}

TEST_CASE("crop outside the image is rejected") {
    ImageTensor img(16, 16, 3);
    CHECK_THROWS_AS(extract_view(img, CropSpec{10, 10, 8, 8, false, 0}, 8, 0.0f), ArgumentError);
}

TEST_CASE("crop line format") {
    CHECK(format_crop_line(CropSpec{1, 2, 3, 4, true, 99}) == "1 2 3 4 1 99");
}

}  // TEST_SUITE
