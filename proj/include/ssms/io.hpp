#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssms/model.hpp"

namespace ssms {

using Triangle = std::array<int, 3>;

// Container sidecar data that is not part of the numerical model.
struct ModelMeta {
  std::string label;
  std::string created;  // caller-provided note; never wall clock, so that
                        // identical inputs give identical bytes
  std::vector<Triangle> topology;
};

// "SSM1" container: magic, 8-byte little-endian header length, UTF-8 JSON
// header, then three payloads (mean, eigenvalues, basis column-major), each
// an 8-byte little-endian element count followed by raw little-endian
// doubles.
void save_model(const std::filesystem::path& path, const ShapeModel& m,
                const ModelMeta& meta = {});

struct LoadedModel {
  ShapeModel model;
  ModelMeta meta;
};

LoadedModel load_model(const std::filesystem::path& path);

// One row per shape; values use shortest round-trip decimal formatting.
void save_samples_csv(const std::filesystem::path& path,
                      const std::vector<Shape>& samples);

std::vector<Shape> load_samples_csv(const std::filesystem::path& path, int d);

// Wavefront OBJ, d = 3 only; 17 significant digits per coordinate.
void export_mesh(const Shape& shape, const std::vector<Triangle>& topology,
                 const std::filesystem::path& path);

struct AngularBound {
  int point;      // star point index the bound applies to
  double lo_deg;  // absolute angles
  double hi_deg;
};

// Self-contained SVG: star outlines for a subsample, shaded angular bound
// wedges, and a 36-bin polar histogram of point-0 angles.
void export_star_plot(const std::vector<Shape>& shapes,
                      const std::vector<AngularBound>& overlays,
                      const std::filesystem::path& path);

// Full record of one CLI run: every number that influenced the result plus
// the diagnostics. Serialized with stable key order; timing is included
// only on request since it would break byte-for-byte reproducibility.
struct RunReport {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<double> acceptance_rates;
  std::optional<double> epsilon_estimate;
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;
  std::optional<double> wall_clock_seconds;

  std::string to_json_string() const;
};

void save_report(const std::filesystem::path& path, const RunReport& report);

}  // namespace ssms
