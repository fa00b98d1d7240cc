#include "ssms/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ssms {

namespace {

static_assert(std::endian::native == std::endian::little,
              "container writer assumes a little-endian host");

std::string shortest(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string digits17(double v) {
  char buf[40];
  auto [p, ec] =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, p);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}

void write_doubles(std::ostream& os, const double* data, std::uint64_t count) {
  write_u64(os, count);
  os.write(reinterpret_cast<const char*>(data),
           static_cast<std::streamsize>(count * sizeof(double)));
}

[[noreturn]] void fail(const std::filesystem::path& path, std::streamoff at,
                       const std::string& what) {
  throw format_error(path.string() + ": " + what + " (byte offset " +
                     std::to_string(at) + ")");
}

std::uint64_t read_u64(std::istream& is, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  std::streamoff at = is.tellg();
  if (!is.read(reinterpret_cast<char*>(&v), 8))
    fail(path, at, "truncated length field");
  return v;
}

Vec read_doubles(std::istream& is, const std::filesystem::path& path,
                 std::uint64_t expected, const char* name) {
  std::streamoff at = is.tellg();
  std::uint64_t count = read_u64(is, path);
  if (count != expected)
    fail(path, at,
         std::string(name) + " length " + std::to_string(count) +
             " does not match header (expected " + std::to_string(expected) +
             ")");
  Vec v(static_cast<Eigen::Index>(count));
  at = is.tellg();
  if (!is.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(count * sizeof(double))))
    fail(path, at, std::string("truncated ") + name + " payload");
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      fail(path, at + i * 8, std::string("non-finite value in ") + name);
  return v;
}

}  // namespace

void save_model(const std::filesystem::path& path, const ShapeModel& m,
                const ModelMeta& meta) {
  validate_model(m);
  nlohmann::json header = {
      {"format_version", 1}, {"d", m.d()},           {"n", m.n()},
      {"q", m.q()},          {"created", meta.created},
      {"label", meta.label},
  };
  if (!meta.topology.empty()) {
    auto& t = header["topology"] = nlohmann::json::array();
    for (const auto& tri : meta.topology) t.push_back({tri[0], tri[1], tri[2]});
  }
  std::string hs = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw format_error(path.string() + ": cannot open for writing");
  os.write("SSM1", 4);
  write_u64(os, hs.size());
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  write_doubles(os, m.mean.data.data(), static_cast<std::uint64_t>(m.mean.dim()));
  write_doubles(os, m.eigenvalues.data(), static_cast<std::uint64_t>(m.q()));
  write_doubles(os, m.basis.data(),
                static_cast<std::uint64_t>(m.basis.size()));
  if (!os) throw format_error(path.string() + ": write failed");
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error(path.string() + ": cannot open");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "SSM1", 4) != 0)
    fail(path, 0, "bad magic, not an SSM1 container");
  std::uint64_t hlen = read_u64(is, path);
  if (hlen > (1ULL << 30)) fail(path, 4, "implausible header length");
  std::string hs(hlen, '\0');
  std::streamoff at = is.tellg();
  if (!is.read(hs.data(), static_cast<std::streamsize>(hlen)))
    fail(path, at, "truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::parse_error& e) {
    fail(path, at, std::string("header is not valid JSON: ") + e.what());
  }
  if (header.value("format_version", -1) != 1)
    fail(path, at, "unsupported format_version");
  int d = header.at("d").get<int>();
  int n = header.at("n").get<int>();
  int q = header.at("q").get<int>();
  auto dn = static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(n);

  LoadedModel out;
  out.meta.label = header.value("label", "");
  out.meta.created = header.value("created", "");
  if (header.contains("topology"))
    for (const auto& tri : header["topology"])
      out.meta.topology.push_back(
          {tri.at(0).get<int>(), tri.at(1).get<int>(), tri.at(2).get<int>()});

  Vec mean = read_doubles(is, path, dn, "mean");
  Vec lambda = read_doubles(is, path, static_cast<std::uint64_t>(q),
                            "eigenvalues");
  Vec basis = read_doubles(is, path, dn * static_cast<std::uint64_t>(q),
                           "basis");

  out.model.mean = Shape(std::move(mean), d, n);
  out.model.eigenvalues = std::move(lambda);
  out.model.basis =
      Eigen::Map<Mat>(basis.data(), static_cast<Eigen::Index>(dn), q);
  try {
    validate_model(out.model);
  } catch (const std::exception& e) {
    fail(path, at, std::string("invalid model: ") + e.what());
  }
  return out;
}

void save_samples_csv(const std::filesystem::path& path,
                      const std::vector<Shape>& samples) {
  require(!samples.empty(), "save_samples_csv: no samples");
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw format_error(path.string() + ": cannot open for writing");
  const int d = samples[0].d, n = samples[0].n;
  const char* coord = "xyz";
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k)
      os << coord[k] << i << (i == n - 1 && k == d - 1 ? "\n" : ",");
  for (const auto& s : samples) {
    require(s.d == d && s.n == n, "save_samples_csv: mixed dimensions");
    for (Eigen::Index j = 0; j < s.data.size(); ++j)
      os << shortest(s.data[j]) << (j + 1 == s.data.size() ? "\n" : ",");
  }
  if (!os) throw format_error(path.string() + ": write failed");
}

std::vector<Shape> load_samples_csv(const std::filesystem::path& path, int d) {
  std::ifstream is(path);
  if (!is) throw format_error(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(is, line)) throw format_error(path.string() + ": empty");
  std::vector<Shape> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      double v;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{})
        throw format_error(path.string() + ": bad number in row " +
                           std::to_string(out.size() + 1));
      vals.push_back(v);
      p = next < end && *next == ',' ? next + 1 : next;
    }
    if (vals.size() % d != 0)
      throw format_error(path.string() + ": row length not divisible by d");
    Vec v = Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    out.push_back(Shape(v, d, static_cast<int>(vals.size()) / d));
  }
  return out;
}

void export_mesh(const Shape& shape, const std::vector<Triangle>& topology,
                 const std::filesystem::path& path) {
  require(shape.d == 3, "export_mesh: only d = 3 shapes");
  for (const auto& t : topology)
    for (int idx : t)
      require(idx >= 0 && idx < shape.n, "export_mesh: face index out of range");
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw format_error(path.string() + ": cannot open for writing");
  for (int i = 0; i < shape.n; ++i)
    os << "v " << digits17(shape.data[3 * i]) << ' '
       << digits17(shape.data[3 * i + 1]) << ' '
       << digits17(shape.data[3 * i + 2]) << '\n';
  for (const auto& t : topology)
    os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!os) throw format_error(path.string() + ": write failed");
}

namespace {

std::string fmt3(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v,
                               std::chars_format::fixed, 3);
  return std::string(buf, p);
}

}  // namespace

void export_star_plot(const std::vector<Shape>& shapes,
                      const std::vector<AngularBound>& overlays,
                      const std::filesystem::path& path) {
  for (const auto& s : shapes)
    require(s.d == 2 && s.n == 5, "export_star_plot: shapes must be d=2, n=5");

  // Plot radius from the data, falling back to 1 for an empty list.
  double rmax = 1.0;
  for (const auto& s : shapes)
    for (int i = 0; i < 5; ++i)
      rmax = std::max(rmax, s.data.segment(2 * i, 2).norm());

  const double view = 1.45 * rmax;
  const double scale = 200.0 / view;  // svg units per model unit
  auto X = [&](double x) { return fmt3(220.0 + x * scale); };
  auto Y = [&](double y) { return fmt3(220.0 - y * scale); };

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw format_error(path.string() + ": cannot open for writing");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 440 440\">\n"
     << "<rect width=\"440\" height=\"440\" fill=\"white\"/>\n";

  // Shaded angular bounds as wedges from the origin.
  for (const auto& b : overlays) {
    double lo = b.lo_deg * std::numbers::pi / 180.0;
    double hi = b.hi_deg * std::numbers::pi / 180.0;
    double rr = 1.15 * rmax;
    int large = (b.hi_deg - b.lo_deg) > 180.0 ? 1 : 0;
    os << "<path d=\"M " << X(0) << ' ' << Y(0) << " L "
       << X(rr * std::cos(lo)) << ' ' << Y(rr * std::sin(lo)) << " A "
       << fmt3(rr * scale) << ' ' << fmt3(rr * scale) << " 0 " << large
       << " 0 " << X(rr * std::cos(hi)) << ' ' << Y(rr * std::sin(hi))
       << " Z\" fill=\"#d62728\" fill-opacity=\"0.15\" stroke=\"#d62728\" "
          "stroke-width=\"0.8\"/>\n";
  }

  // Star outlines for an even subsample.
  const std::size_t max_outlines = 150;
  std::size_t stride =
      shapes.empty() ? 1 : std::max<std::size_t>(1, shapes.size() / max_outlines);
  for (std::size_t k = 0; k < shapes.size(); k += stride) {
    const auto& s = shapes[k];
    os << "<polygon points=\"";
    for (int i = 0; i < 5; ++i)
      os << X(s.data[2 * i]) << ',' << Y(s.data[2 * i + 1])
         << (i == 4 ? "" : " ");
    os << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-opacity=\"0.25\" "
          "stroke-width=\"0.6\"/>\n";
  }

  // Polar histogram of point-0 angles, 36 bins over the full circle, drawn
  // as radial bars outside the data radius.
  if (!shapes.empty()) {
    std::array<int, 36> bins{};
    for (const auto& s : shapes) {
      double ang = std::atan2(s.data[1], s.data[0]);
      if (ang < 0) ang += 2.0 * std::numbers::pi;
      int b = std::min(35, static_cast<int>(ang / (2.0 * std::numbers::pi) * 36));
      bins[b]++;
    }
    int peak = *std::max_element(bins.begin(), bins.end());
    for (int b = 0; b < 36; ++b) {
      if (bins[b] == 0) continue;
      double mid = (b + 0.5) * 2.0 * std::numbers::pi / 36.0;
      double r0 = 1.2 * rmax;
      double r1 = r0 + 0.2 * rmax * bins[b] / peak;
      os << "<line x1=\"" << X(r0 * std::cos(mid)) << "\" y1=\""
         << Y(r0 * std::sin(mid)) << "\" x2=\"" << X(r1 * std::cos(mid))
         << "\" y2=\"" << Y(r1 * std::sin(mid))
         << "\" stroke=\"#2ca02c\" stroke-width=\"4\"/>\n";
    }
  }
  os << "</svg>\n";
  if (!os) throw format_error(path.string() + ": write failed");
}

std::string RunReport::to_json_string() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["acceptance_rates"] = acceptance_rates;
  if (epsilon_estimate) j["epsilon_estimate"] = *epsilon_estimate;
  j["metrics"] = metrics;
  j["warnings"] = warnings;
  if (wall_clock_seconds) j["wall_clock_seconds"] = *wall_clock_seconds;
  return j.dump(2) + "\n";
}

void save_report(const std::filesystem::path& path, const RunReport& report) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw format_error(path.string() + ": cannot open for writing");
  os << report.to_json_string();
  if (!os) throw format_error(path.string() + ": write failed");
}

}  // namespace ssms
