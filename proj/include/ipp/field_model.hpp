#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ipp/grid.hpp"

namespace ipp {

enum class InstanceSource { ingested, synthetic };

/// Ground-truth field normalized to [0, 1]. Raw values are truth * norm_scale + norm_offset.
struct FieldInstance {
  std::string id;
  GridField truth;
  double norm_offset = 0.0;
  double norm_scale = 1.0;
  InstanceSource source = InstanceSource::synthetic;

  GridField denormalized() const;
};

/// Min-max normalizes raw values in place of a new instance. A constant field maps to all zeros
/// with scale 1.
FieldInstance normalize_instance(std::string id, const GridField& raw, InstanceSource source);

enum class Attribute { temperature, humidity };

struct SensorReading {
  std::string timestamp;  // "date time" as written in the log
  std::int64_t epoch = 0;
  int mote_id = 0;
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

struct IngestStats {
  std::size_t rows = 0;
  std::size_t dropped_unparseable = 0;
  std::size_t skipped_unknown_mote = 0;
};

struct MoteLocation {
  double x = 0.0;
  double y = 0.0;
};

std::map<int, MoteLocation> read_mote_locations(const std::filesystem::path& path);

/// Parses an Intel-Lab-layout log (`date time epoch mote_id temperature humidity light voltage`).
std::vector<SensorReading> ingest_sensor_log(const std::filesystem::path& log_path,
                                             const std::filesystem::path& locations_path,
                                             Attribute attribute, IngestStats* stats = nullptr);

struct SensorFilterResult {
  std::vector<int> kept;
  std::vector<int> dropped;
};

/// Drops motes whose fraction of epochs without an in-range reading exceeds max_missing_frac.
/// Throws if fewer than 10 motes survive.
SensorFilterResult filter_faulty_sensors(const std::vector<SensorReading>& readings,
                                         std::pair<double, double> validity_range = {0.0, 50.0},
                                         double max_missing_frac = 0.5);

struct MoteSample {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

struct SurrogateOptions {
  int out_h = 32;
  int out_w = 32;
  double cells_per_meter = 1.0;
  std::string id = "surrogate";
};

/// Kriges a snapshot of mote values over the motes' bounding box, bilinearly resamples to
/// out_h x out_w and normalizes to [0, 1].
FieldInstance build_surrogate_instance(const std::vector<MoteSample>& motes, const SurrogateOptions& options = {});

/// Bilinear resampling with corner-aligned sample positions.
GridField bilinear_resample(const GridField& src, int out_h, int out_w);

struct SyntheticSpec {
  int h = 32;
  int w = 32;
  int n_bumps = 5;
  double length_scale = 6.0;
};

struct GaussianBump {
  double row = 0.0;
  double col = 0.0;
  double amplitude = 0.0;
};

/// The bumps generate_synthetic_field sums for a given seed.
std::vector<GaussianBump> synthetic_bumps(std::uint64_t seed, const SyntheticSpec& spec);

/// Sum of random Gaussian bumps, min-max normalized. Deterministic given seed.
FieldInstance generate_synthetic_field(std::uint64_t seed, const SyntheticSpec& spec = {});

/// Convenience: n instances with ids "syn-<seed>-<i>".
std::vector<FieldInstance> generate_synthetic_suite(std::uint64_t seed, int count, const SyntheticSpec& spec = {});

struct InstanceSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

InstanceSplit split_instances(const std::vector<std::string>& ids, int n_train, int n_test, std::uint64_t seed);

/// Picks snapshot epochs uniformly at random among those where at least min_reporting kept motes
/// have an in-range reading.
std::vector<std::int64_t> select_snapshot_epochs(const std::vector<SensorReading>& readings,
                                                 const std::vector<int>& kept_motes,
                                                 std::pair<double, double> validity_range, int min_reporting,
                                                 int count, std::uint64_t seed);

// JSON I/O: {id, h, w, norm_offset, norm_scale, source, values}
std::string instance_to_json(const FieldInstance& instance);
FieldInstance instance_from_json(const std::string& text);
void save_instance(const FieldInstance& instance, const std::filesystem::path& path);
FieldInstance load_instance(const std::filesystem::path& path);

}  // namespace ipp
