#include "ipp/field_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "ipp/kriging.hpp"
#include "ipp/rng.hpp"

namespace ipp {

GridField FieldInstance::denormalized() const {
  GridField raw = truth;
  for (double& v : raw.values()) {
    v = v * norm_scale + norm_offset;
  }
  return raw;
}

FieldInstance normalize_instance(std::string id, const GridField& raw, InstanceSource source) {
  if (!raw.all_finite()) {
    throw Error("normalize_instance: field contains non-finite values");
  }
  FieldInstance inst;
  inst.id = std::move(id);
  inst.source = source;
  const double lo = raw.min();
  const double hi = raw.max();
  // A spread at rounding level (e.g. kriging a constant snapshot) is a constant field.
  const bool flat = hi - lo <= 1e-12 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
  inst.norm_offset = lo;
  inst.norm_scale = flat ? 1.0 : hi - lo;
  inst.truth = raw;
  for (double& v : inst.truth.values()) {
    v = flat ? 0.0 : (v - lo) / inst.norm_scale;
  }
  return inst;
}

std::map<int, MoteLocation> read_mote_locations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open mote locations file: " + path.string());
  }
  std::map<int, MoteLocation> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    int id = 0;
    MoteLocation loc;
    if (ss >> id >> loc.x >> loc.y) {
      out[id] = loc;
    }
  }
  return out;
}

namespace {

bool parse_double(const std::string& token, double& out) {
  if (token.empty()) {
    return false;
  }
  try {
    std::size_t used = 0;
    out = std::stod(token, &used);
    return used == token.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

std::vector<SensorReading> ingest_sensor_log(const std::filesystem::path& log_path,
                                             const std::filesystem::path& locations_path,
                                             Attribute attribute, IngestStats* stats) {
  const auto locations = read_mote_locations(locations_path);
  std::ifstream in(log_path);
  if (!in) {
    throw Error("cannot open sensor log: " + log_path.string());
  }
  IngestStats local;
  std::vector<SensorReading> out;
  const std::size_t column = attribute == Attribute::temperature ? 4 : 5;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<std::string> cols;
    for (std::string tok; ss >> tok;) {
      cols.push_back(tok);
    }
    if (cols.empty()) {
      continue;
    }
    ++local.rows;
    double epoch = 0.0;
    double mote = 0.0;
    double value = 0.0;
    if (cols.size() <= column || !parse_double(cols[2], epoch) || !parse_double(cols[3], mote) ||
        !parse_double(cols[column], value) || mote < 1.0) {
      ++local.dropped_unparseable;
      continue;
    }
    const auto loc = locations.find(static_cast<int>(mote));
    if (loc == locations.end()) {
      ++local.skipped_unknown_mote;
      continue;
    }
    SensorReading r;
    r.timestamp = cols[0] + " " + cols[1];
    r.epoch = static_cast<std::int64_t>(epoch);
    r.mote_id = static_cast<int>(mote);
    r.x = loc->second.x;
    r.y = loc->second.y;
    r.value = value;
    out.push_back(std::move(r));
  }
  if (stats != nullptr) {
    *stats = local;
  }
  return out;
}

SensorFilterResult filter_faulty_sensors(const std::vector<SensorReading>& readings,
                                         std::pair<double, double> validity_range, double max_missing_frac) {
  if (!(validity_range.first < validity_range.second)) {
    throw Error("filter_faulty_sensors: validity range must satisfy lo < hi");
  }
  std::set<std::int64_t> epochs;
  std::map<int, std::set<std::int64_t>> valid_epochs;
  for (const auto& r : readings) {
    epochs.insert(r.epoch);
    auto& slot = valid_epochs[r.mote_id];
    if (r.value > validity_range.first && r.value < validity_range.second) {
      slot.insert(r.epoch);
    }
  }
  SensorFilterResult result;
  const double total = static_cast<double>(epochs.size());
  for (const auto& [mote, valid] : valid_epochs) {
    const double bad_frac = total > 0.0 ? 1.0 - static_cast<double>(valid.size()) / total : 1.0;
    (bad_frac > max_missing_frac ? result.dropped : result.kept).push_back(mote);
  }
  if (result.kept.size() < 10) {
    throw Error("filter_faulty_sensors: fewer than 10 usable motes remain");
  }
  return result;
}

GridField bilinear_resample(const GridField& src, int out_h, int out_w) {
  GridField out(out_h, out_w);
  const double sy = out_h > 1 ? static_cast<double>(src.height() - 1) / (out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(src.width() - 1) / (out_w - 1) : 0.0;
  for (int r = 0; r < out_h; ++r) {
    const double y = r * sy;
    const int y0 = std::min(static_cast<int>(std::floor(y)), src.height() - 1);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double fy = y - y0;
    for (int c = 0; c < out_w; ++c) {
      const double x = c * sx;
      const int x0 = std::min(static_cast<int>(std::floor(x)), src.width() - 1);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double fx = x - x0;
      const double top = src(y0, x0) * (1.0 - fx) + src(y0, x1) * fx;
      const double bottom = src(y1, x0) * (1.0 - fx) + src(y1, x1) * fx;
      out(r, c) = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

namespace {

bool has_duplicates(const std::vector<Point>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (distance(pts[i], pts[j]) == 0.0) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

FieldInstance build_surrogate_instance(const std::vector<MoteSample>& motes, const SurrogateOptions& options) {
  if (motes.size() < 4) {
    throw Error("build_surrogate_instance: too few motes");
  }
  if (options.out_h < 2 || options.out_w < 2 || options.cells_per_meter <= 0.0) {
    throw Error("build_surrogate_instance: invalid output options");
  }
  double xmin = motes[0].x, xmax = motes[0].x, ymin = motes[0].y, ymax = motes[0].y;
  for (const auto& m : motes) {
    xmin = std::min(xmin, m.x);
    xmax = std::max(xmax, m.x);
    ymin = std::min(ymin, m.y);
    ymax = std::max(ymax, m.y);
  }
  const int grid_h = std::max(2, static_cast<int>(std::lround((ymax - ymin) * options.cells_per_meter)) + 1);
  const int grid_w = std::max(2, static_cast<int>(std::lround((xmax - xmin) * options.cells_per_meter)) + 1);

  std::vector<Point> pts;
  std::vector<double> values;
  for (const auto& m : motes) {
    if (!std::isfinite(m.value)) {
      throw Error("build_surrogate_instance: non-finite mote value");
    }
    pts.push_back({(m.y - ymin) * options.cells_per_meter, (m.x - xmin) * options.cells_per_meter});
    values.push_back(m.value);
  }
  if (has_duplicates(pts)) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int shift = 0;
      for (std::size_t j = 0; j < i; ++j) {
        if (distance(pts[i], pts[j]) == 0.0) {
          ++shift;
        }
      }
      pts[i].col += 0.5 * shift;
    }
    if (has_duplicates(pts)) {
      throw Error("build_surrogate_instance: duplicate mote coordinates persist after perturbation");
    }
  }

  const VariogramParams params = fit_spherical(empirical_semivariogram(pts, values));
  const OrdinaryKriging ok(pts, values, params);
  GridField intermediate(grid_h, grid_w);
  for (int r = 0; r < grid_h; ++r) {
    for (int c = 0; c < grid_w; ++c) {
      intermediate(r, c) = ok.predict({static_cast<double>(r), static_cast<double>(c)}).mean;
    }
  }
  GridField resampled = bilinear_resample(intermediate, options.out_h, options.out_w);
  if (!resampled.all_finite()) {
    throw Error("build_surrogate_instance: interpolation produced non-finite values");
  }
  return normalize_instance(options.id, resampled, InstanceSource::ingested);
}

std::vector<GaussianBump> synthetic_bumps(std::uint64_t seed, const SyntheticSpec& spec) {
  if (spec.h < 2 || spec.w < 2 || spec.n_bumps < 1 || !(spec.length_scale > 0.0)) {
    throw Error("generate_synthetic_field: invalid parameters");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> row(0.0, spec.h - 1);
  std::uniform_real_distribution<double> col(0.0, spec.w - 1);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<GaussianBump> bumps;
  for (int i = 0; i < spec.n_bumps; ++i) {
    GaussianBump b;
    b.row = row(rng);
    b.col = col(rng);
    b.amplitude = amp(rng);
    bumps.push_back(b);
  }
  return bumps;
}

FieldInstance generate_synthetic_field(std::uint64_t seed, const SyntheticSpec& spec) {
  const auto bumps = synthetic_bumps(seed, spec);
  GridField raw(spec.h, spec.w);
  const double denom = 2.0 * spec.length_scale * spec.length_scale;
  for (int r = 0; r < spec.h; ++r) {
    for (int c = 0; c < spec.w; ++c) {
      double v = 0.0;
      for (const auto& b : bumps) {
        const double dr = r - b.row;
        const double dc = c - b.col;
        v += b.amplitude * std::exp(-(dr * dr + dc * dc) / denom);
      }
      raw(r, c) = v;
    }
  }
  return normalize_instance("syn-" + std::to_string(seed), raw, InstanceSource::synthetic);
}

std::vector<FieldInstance> generate_synthetic_suite(std::uint64_t seed, int count, const SyntheticSpec& spec) {
  std::vector<FieldInstance> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    FieldInstance inst = generate_synthetic_field(derive_seed(seed, static_cast<std::uint64_t>(i)), spec);
    inst.id = "syn-" + std::to_string(seed) + "-" + std::to_string(i);
    out.push_back(std::move(inst));
  }
  return out;
}

InstanceSplit split_instances(const std::vector<std::string>& ids, int n_train, int n_test, std::uint64_t seed) {
  if (n_train < 0 || n_test < 0 || static_cast<std::size_t>(n_train + n_test) > ids.size()) {
    throw Error("split_instances: not enough instances for the requested split");
  }
  std::vector<std::string> order = ids;
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  InstanceSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.test.assign(order.begin() + n_train, order.begin() + n_train + n_test);
  return split;
}

std::vector<std::int64_t> select_snapshot_epochs(const std::vector<SensorReading>& readings,
                                                 const std::vector<int>& kept_motes,
                                                 std::pair<double, double> validity_range, int min_reporting,
                                                 int count, std::uint64_t seed) {
  const std::set<int> kept(kept_motes.begin(), kept_motes.end());
  std::map<std::int64_t, std::set<int>> reporting;
  for (const auto& r : readings) {
    if (kept.contains(r.mote_id) && r.value > validity_range.first && r.value < validity_range.second) {
      reporting[r.epoch].insert(r.mote_id);
    }
  }
  std::vector<std::int64_t> eligible;
  for (const auto& [epoch, motes] : reporting) {
    if (static_cast<int>(motes.size()) >= min_reporting) {
      eligible.push_back(epoch);
    }
  }
  if (static_cast<int>(eligible.size()) < count) {
    throw Error("select_snapshot_epochs: only " + std::to_string(eligible.size()) + " eligible epochs");
  }
  Rng rng(seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(static_cast<std::size_t>(count));
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

std::string instance_to_json(const FieldInstance& instance) {
  nlohmann::json j;
  j["id"] = instance.id;
  j["h"] = instance.truth.height();
  j["w"] = instance.truth.width();
  j["norm_offset"] = instance.norm_offset;
  j["norm_scale"] = instance.norm_scale;
  j["source"] = instance.source == InstanceSource::ingested ? "ingested" : "synthetic";
  j["values"] = instance.truth.values();
  return j.dump();
}

FieldInstance instance_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  FieldInstance inst;
  inst.id = j.at("id").get<std::string>();
  inst.norm_offset = j.at("norm_offset").get<double>();
  inst.norm_scale = j.at("norm_scale").get<double>();
  if (!(inst.norm_scale > 0.0)) {
    throw Error("instance_from_json: norm_scale must be positive");
  }
  inst.source = j.value("source", std::string("synthetic")) == "ingested" ? InstanceSource::ingested
                                                                          : InstanceSource::synthetic;
  inst.truth = GridField(j.at("h").get<int>(), j.at("w").get<int>(), j.at("values").get<std::vector<double>>());
  return inst;
}

void save_instance(const FieldInstance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write instance file: " + path.string());
  }
  out << instance_to_json(instance) << '\n';
}

FieldInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open instance file: " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return instance_from_json(ss.str());
}

}  // namespace ipp
