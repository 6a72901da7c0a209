#include <doctest.h>

#include <fstream>

#include "emojipred/checkpoint.hpp"
#include "emojipred/common.hpp"
#include "helpers.hpp"

using namespace emojipred;

TEST_SUITE("checkpoint") {
  TEST_CASE("blobs and header round trip exactly") {
    testing::TempDir dir("ckpt");
    const std::vector<float> f = {1.5f, -0.0f, 3.4028235e38f, 1e-45f};
    const std::vector<double> d = {0.1, -2.0 / 3.0};
    const std::vector<std::int32_t> i = {-7, 0, 2147483647};
    checkpoint::Writer w(nlohmann::json{{"model", "test"}, {"n", 3}});
    w.add("f", f);
    w.add("d", d);
    w.add("i", i);
    w.add("empty", std::span<const float>());
    w.write(dir / "x.ckpt");

    const auto r = checkpoint::Reader::open(dir / "x.ckpt");
    CHECK(r.header()["model"] == "test");
    CHECK(r.f32("f") == f);
    CHECK(r.f64("d") == d);
    CHECK(r.i32("i") == i);
    CHECK(r.f32("empty").empty());
    CHECK_THROWS_AS(r.f32("missing"), ConsistencyError);
    CHECK_THROWS_AS(r.f64("f"), ConsistencyError);
  }

  TEST_CASE("bad files are rejected") {
    testing::TempDir dir("ckpt_bad");
    CHECK_THROWS_AS(checkpoint::Reader::open(dir / "none.ckpt"), MissingResourceError);
    testing::write_file(dir / "junk.ckpt", "not a checkpoint at all");
    CHECK_THROWS_AS(checkpoint::Reader::open(dir / "junk.ckpt"), ConsistencyError);

    checkpoint::Writer w(nlohmann::json{{"model", "t"}});
    w.add("v", std::vector<double>{1, 2, 3});
    w.write(dir / "ok.ckpt");
    std::string bytes = testing::read_file(dir / "ok.ckpt");
    testing::write_file(dir / "trunc.ckpt", bytes.substr(0, bytes.size() - 4));
    CHECK_THROWS_AS(checkpoint::Reader::open(dir / "trunc.ckpt"), ConsistencyError);
  }
}
