#include <doctest.h>

#include <fstream>
#include <iterator>
#include <random>

#include "fringe/grid.hpp"
#include "fringe/io.hpp"
#include "support.hpp"

using namespace fringe;

namespace {
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("wrap_phase maps into (-pi, pi] and is idempotent") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 10000; ++i) {
      const double a = u(rng);
      const double w = wrap_phase(a);
      CHECK(w > -kPi);
      CHECK(w <= kPi);
      CHECK(wrap_phase(w) == w);
      const double k = (a - w) / kTwoPi;
      CHECK(std::abs(k - std::round(k)) < 1e-9);
    }
    CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(0.0) == 0.0);
  }

  TEST_CASE("shape mismatch is a validation error") {
    Image a(4, 3), b(3, 4);
    CHECK_THROWS_AS(require_same_shape(a, b, "test"), ValidationError);
    CHECK_NOTHROW(require_same_shape(a, Image(4, 3), "test"));
  }
}

TEST_SUITE("io") {
  TEST_CASE("FPT round trip is exact for float values") {
    const auto dir = test::scratch_dir("io_fpt");
    std::mt19937_64 rng(5);
    Image img = test::random_image(13, 7, rng, -5.0, 5.0);
    for (auto& v : img.values()) v = static_cast<float>(v);
    io::write_image_fpt(dir / "a.fpt", img);
    const Image back = io::read_image_fpt(dir / "a.fpt");
    CHECK(back == img);

    const std::string bytes = slurp(dir / "a.fpt");
    REQUIRE(bytes.size() == 4 + 4 + 2 * 4 + 13 * 7 * 4);
    CHECK(bytes.substr(0, 4) == "FPT1");
    CHECK(static_cast<unsigned char>(bytes[4]) == 2);
    CHECK(static_cast<unsigned char>(bytes[8]) == 7);   // H
    CHECK(static_cast<unsigned char>(bytes[12]) == 13);  // W
  }

  TEST_CASE("FPT stacks keep frame order") {
    const auto dir = test::scratch_dir("io_stack");
    std::vector<Image> frames{Image(3, 2, 1.0), Image(3, 2, 2.0), Image(3, 2, 3.0)};
    io::write_fpt(dir / "s.fpt", io::to_raw(frames));
    const auto back = io::images_from_raw(io::read_fpt(dir / "s.fpt"));
    REQUIRE(back.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(back[i] == frames[i]);
  }

  TEST_CASE("corrupt and missing files raise IoError") {
    const auto dir = test::scratch_dir("io_bad");
    CHECK_THROWS_AS(io::read_image_fpt(dir / "missing.fpt"), IoError);
    CHECK_THROWS_AS(io::read_pgm(dir / "missing.pgm"), IoError);
    std::ofstream(dir / "bad.fpt", std::ios::binary) << "NOPE1234";
    CHECK_THROWS_AS(io::read_image_fpt(dir / "bad.fpt"), IoError);
    std::ofstream(dir / "short.fpt", std::ios::binary) << "FPT1";
    CHECK_THROWS_AS(io::read_image_fpt(dir / "short.fpt"), IoError);
  }

  TEST_CASE("PGM stores rounded, clamped 8-bit values") {
    const auto dir = test::scratch_dir("io_pgm");
    Image img(4, 2);
    const double vals[] = {0.0, 1.4, 1.6, 254.6, 300.0, -3.0, 128.0, 77.5};
    for (int i = 0; i < 8; ++i) img[i] = vals[i];
    io::write_pgm(dir / "a.pgm", img);
    const Image back = io::read_pgm(dir / "a.pgm");
    const double want[] = {0, 1, 2, 255, 255, 0, 128, 78};
    for (int i = 0; i < 8; ++i) CHECK(back[i] == want[i]);
    Mask m(3, 1);
    m[1] = 1;
    io::write_pgm(dir / "m.pgm", m);
    const Mask mb = io::read_mask_pgm(dir / "m.pgm");
    CHECK(mb[0] == 0);
    CHECK(mb[1] == 1);
    CHECK(mb[2] == 0);
  }

  TEST_CASE("PNG output is byte-for-byte deterministic") {
    const auto dir = test::scratch_dir("io_png");
    std::mt19937_64 rng(9);
    const Image img = test::random_image(32, 16, rng, 0.0, 1.0);
    io::write_png_heatmap(dir / "a.png", img, 0.0, 1.0);
    io::write_png_heatmap(dir / "b.png", img, 0.0, 1.0);
    io::write_png_gray(dir / "c.png", img, 0.0, 1.0);
    io::write_png_gray(dir / "d.png", img, 0.0, 1.0);
    CHECK(slurp(dir / "a.png") == slurp(dir / "b.png"));
    CHECK(slurp(dir / "c.png") == slurp(dir / "d.png"));
    CHECK(slurp(dir / "a.png").substr(1, 3) == "PNG");
  }

  TEST_CASE("jet colour map endpoints") {
    const auto lo = io::jet(0.0);
    const auto hi = io::jet(1.0);
    CHECK(lo[2] > lo[0]);
    CHECK(hi[0] > hi[2]);
  }
}
