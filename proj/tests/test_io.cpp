#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "ssms/datagen.hpp"
#include "ssms/io.hpp"

using namespace ssms;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  auto p = fs::temp_directory_path() / "ssms_io_tests";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::uint64_t header_len(const std::string& bytes) {
  std::uint64_t v;
  std::memcpy(&v, bytes.data() + 4, 8);
  return v;
}

}  // namespace

TEST_CASE("model container round trip is bit exact") {
  auto m = test::make_random_model(3, 8, 4, 501);
  ModelMeta meta;
  meta.label = "left femur";
  meta.created = "fixture";
  meta.topology = {{0, 1, 2}, {2, 3, 4}};

  auto path = tmp_dir() / "roundtrip.ssm1";
  save_model(path, m, meta);
  auto loaded = load_model(path);

  CHECK(loaded.model.mean.data == m.mean.data);
  CHECK(loaded.model.eigenvalues == m.eigenvalues);
  CHECK(loaded.model.basis == m.basis);
  CHECK(loaded.model.d() == 3);
  CHECK(loaded.model.n() == 8);
  CHECK(loaded.meta.label == "left femur");
  CHECK(loaded.meta.created == "fixture");
  CHECK(loaded.meta.topology == meta.topology);

  // identical input, identical bytes
  auto path2 = tmp_dir() / "roundtrip2.ssm1";
  save_model(path2, m, meta);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("container reader reports corruption with byte offsets") {
  auto m = test::make_random_model(2, 5, 2, 502);
  auto path = tmp_dir() / "corrupt.ssm1";
  save_model(path, m);
  const std::string good = slurp(path);
  const std::uint64_t hlen = header_len(good);

  SUBCASE("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    spit(path, bad);
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("bad magic"),
                         format_error);
  }
  SUBCASE("truncated payload") {
    spit(path, good.substr(0, good.size() - 7));
    CHECK_THROWS_WITH_AS(load_model(path),
                         doctest::Contains("truncated basis payload"),
                         format_error);
  }
  SUBCASE("payload length disagrees with header") {
    std::string bad = good;
    // eigenvalue count field sits after the header and the mean block
    std::size_t at = 12 + hlen + 8 + 10 * 8;
    std::uint64_t wrong = 7;
    std::memcpy(bad.data() + at, &wrong, 8);
    spit(path, bad);
    CHECK_THROWS_WITH_AS(load_model(path),
                         doctest::Contains("does not match header"),
                         format_error);
  }
  SUBCASE("non-finite values") {
    std::string bad = good;
    double nan = std::numeric_limits<double>::quiet_NaN();
    std::memcpy(bad.data() + 12 + hlen + 8, &nan, 8);  // first mean entry
    spit(path, bad);
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("non-finite"),
                         format_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_model(tmp_dir() / "no_such.ssm1"), format_error);
  }
}

TEST_CASE("csv round trip preserves every bit") {
  Rng rng(503);
  std::vector<Shape> samples;
  for (int i = 0; i < 20; ++i) samples.push_back(test::random_shape(2, 5, rng));
  samples.push_back(Shape((Vec(10) << 1e-17, -3.5, 0.1, 0, 2e300, -7, 42.0,
                           0.3333333333333333, 1, -0.0)
                              .finished(),
                          2, 5));

  auto path = tmp_dir() / "samples.csv";
  save_samples_csv(path, samples);
  auto back = load_samples_csv(path, 2);
  REQUIRE(back.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].d == 2);
    CHECK(back[i].n == 5);
    CHECK(back[i].data == samples[i].data);
  }

  std::istringstream header(slurp(path));
  std::string first;
  std::getline(header, first);
  CHECK(first == "x0,y0,x1,y1,x2,y2,x3,y3,x4,y4");
}

TEST_CASE("csv reader rejects malformed rows") {
  auto path = tmp_dir() / "bad.csv";
  spit(path, "x0,y0\n1.0,2.0\n3.0,oops\n");
  CHECK_THROWS_WITH_AS(load_samples_csv(path, 2),
                       doctest::Contains("bad number"), format_error);
  spit(path, "x0,y0,x1\n1.0,2.0,3.0\n");
  CHECK_THROWS_WITH_AS(load_samples_csv(path, 2),
                       doctest::Contains("not divisible"), format_error);
  spit(path, "");
  CHECK_THROWS_AS(load_samples_csv(path, 2), format_error);
  CHECK_THROWS_AS(load_samples_csv(tmp_dir() / "no_such.csv", 2), format_error);
}

TEST_CASE("obj export writes exact vertices and 1-based faces") {
  Shape tri((Vec(9) << 0, 0, 0, 1, 0, 0, 0, 1, 0).finished(), 3, 3);
  auto path = tmp_dir() / "tri.obj";
  export_mesh(tri, {{0, 1, 2}}, path);
  CHECK(slurp(path) == "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");

  // awkward coordinates survive a reparse exactly
  Rng rng(504);
  Shape noisy = test::random_shape(3, 6, rng);
  export_mesh(noisy, {}, path);
  std::istringstream is(slurp(path));
  std::string tag;
  for (int i = 0; i < 6; ++i) {
    double x, y, z;
    bool ok = static_cast<bool>(is >> tag >> x >> y >> z);
    REQUIRE(ok);
    CHECK(tag == "v");
    CHECK(x == noisy.data[3 * i]);
    CHECK(y == noisy.data[3 * i + 1]);
    CHECK(z == noisy.data[3 * i + 2]);
  }

  Shape flat((Vec(4) << 0, 0, 1, 1).finished(), 2, 2);
  CHECK_THROWS_AS(export_mesh(flat, {}, path), input_error);
  CHECK_THROWS_AS(export_mesh(tri, {{0, 1, 3}}, path), input_error);
}

TEST_CASE("star plot renders outlines, bounds and histogram") {
  StarSpec spec;
  std::vector<Shape> shapes;
  for (int k = 0; k < 40; ++k) {
    auto ang = spec.base_angles;
    ang[0] += (k - 20) * 0.4;
    shapes.push_back(star_shape(spec, ang));
  }
  auto path = tmp_dir() / "plot.svg";
  export_star_plot(shapes, {{0, 85.0, 95.0}}, path);
  std::string svg = slurp(path);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polygon") != std::string::npos);  // outlines
  CHECK(svg.find("<path") != std::string::npos);     // bound wedge
  CHECK(svg.find("<line") != std::string::npos);     // histogram bars

  auto path2 = tmp_dir() / "plot2.svg";
  export_star_plot(shapes, {{0, 85.0, 95.0}}, path2);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("star plot with no shapes still draws the bounds") {
  auto path = tmp_dir() / "empty.svg";
  export_star_plot({}, {{0, 80.0, 100.0}}, path);
  std::string svg = slurp(path);
  CHECK(svg.find("<path") != std::string::npos);
  CHECK(svg.find("<polygon") == std::string::npos);
  CHECK(svg.find("<line") == std::string::npos);

  Rng rng(505);
  Shape wrong = test::random_shape(3, 5, rng);
  CHECK_THROWS_AS(export_star_plot({wrong}, {}, path), input_error);
}

TEST_CASE("run report serializes stably and only what was set") {
  RunReport rep;
  rep.command = "intersect";
  rep.config = {{"sigma", 0.003}, {"chains", 15}};
  rep.acceptance_rates = {0.30, 0.41};
  rep.metrics["d_g"] = 1.25;
  rep.warnings.push_back("chain 3 acceptance 0.61 outside [0.25, 0.5]");

  std::string s = rep.to_json_string();
  CHECK(s == rep.to_json_string());
  CHECK(s.back() == '\n');

  auto j = nlohmann::json::parse(s);
  CHECK(j["command"] == "intersect");
  CHECK(j["config"]["sigma"] == 0.003);
  CHECK(j["metrics"]["d_g"] == 1.25);
  CHECK(!j.contains("epsilon_estimate"));
  CHECK(!j.contains("wall_clock_seconds"));
  CHECK(j["warnings"].size() == 1);

  rep.epsilon_estimate = 0.0021;
  rep.wall_clock_seconds = 1.5;
  auto j2 = nlohmann::json::parse(rep.to_json_string());
  CHECK(j2["epsilon_estimate"] == 0.0021);
  CHECK(j2["wall_clock_seconds"] == 1.5);

  auto path = tmp_dir() / "report.json";
  save_report(path, rep);
  CHECK(slurp(path) == rep.to_json_string());
}
