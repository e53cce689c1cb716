#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "ipp/field_model.hpp"
#include "ipp/kriging.hpp"

namespace fs = std::filesystem;
using namespace ipp;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ipp_fm_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_locations(const fs::path& path, int motes) {
  std::ofstream out(path);
  for (int m = 1; m <= motes; ++m) {
    out << m << ' ' << 1.5 * (m % 9) << ' ' << 2.0 * (m / 9) << '\n';
  }
}

}  // namespace

TEST(Rmse, Identity) {
  GridField a(3, 4, 0.25);
  EXPECT_EQ(rmse(a, a), 0.0);
}

TEST(Rmse, ConstantOffsetIsOne) {
  GridField a(4, 4, 0.0);
  GridField b(4, 4, 1.0);
  EXPECT_DOUBLE_EQ(rmse(b, a), 1.0);
}

TEST(Rmse, HandValueTwoCells) {
  GridField truth(1, 2, std::vector<double>{0.0, 0.0});
  GridField pred(1, 2, std::vector<double>{3.0, 4.0});
  EXPECT_NEAR(rmse(pred, truth), std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(rmse(pred, truth), 3.53553, 1e-5);
}

TEST(Rmse, MismatchThrows) { EXPECT_THROW(rmse(GridField(2, 2), GridField(2, 3)), Error); }

TEST(Rmse, SymmetricAndNonNegative) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 50; ++k) {
    GridField a(5, 6), b(5, 6);
    for (double& v : a.values()) v = u(rng);
    for (double& v : b.values()) v = u(rng);
    EXPECT_DOUBLE_EQ(rmse(a, b), rmse(b, a));
    EXPECT_GE(rmse(a, b), 0.0);
  }
}

TEST(GridFieldTest, RejectsBadShapes) {
  EXPECT_THROW(GridField(0, 3), Error);
  EXPECT_THROW(GridField(2, 2, std::vector<double>{1.0}), Error);
}

TEST(Normalize, ConstantFieldScaleOneValuesZero) {
  const auto inst = normalize_instance("c", GridField(4, 4, 7.5), InstanceSource::ingested);
  EXPECT_EQ(inst.norm_scale, 1.0);
  EXPECT_EQ(inst.norm_offset, 7.5);
  for (double v : inst.truth.values()) EXPECT_EQ(v, 0.0);
}

TEST(Normalize, RoundTripWithin1e9) {
  Rng rng(11);
  std::normal_distribution<double> n(20.0, 4.0);
  GridField raw(8, 8);
  for (double& v : raw.values()) v = n(rng);
  const auto inst = normalize_instance("r", raw, InstanceSource::ingested);
  EXPECT_GT(inst.norm_scale, 0.0);
  EXPECT_DOUBLE_EQ(inst.truth.min(), 0.0);
  EXPECT_DOUBLE_EQ(inst.truth.max(), 1.0);
  const GridField back = inst.denormalized();
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(back.values()[i], raw.values()[i], 1e-9);
}

TEST(Synthetic, SameSeedBitIdentical) {
  const auto a = generate_synthetic_field(42);
  const auto b = generate_synthetic_field(42);
  EXPECT_EQ(a.truth.values(), b.truth.values());
  EXPECT_NE(a.truth.values(), generate_synthetic_field(43).truth.values());
}

TEST(Synthetic, Seed7HasUnitRange) {
  const auto f = generate_synthetic_field(7, {32, 32, 5, 6.0});
  EXPECT_EQ(f.truth.height(), 32);
  EXPECT_EQ(f.truth.width(), 32);
  EXPECT_EQ(f.truth.min(), 0.0);
  EXPECT_EQ(f.truth.max(), 1.0);
}

TEST(Synthetic, SinglePositiveBumpPeaksAtCenter) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40 && checked < 5; ++seed) {
    const SyntheticSpec spec{32, 32, 1, 4.0};
    const auto bumps = synthetic_bumps(seed, spec);
    ASSERT_EQ(bumps.size(), 1u);
    if (bumps[0].amplitude <= 0.0) continue;
    const auto f = generate_synthetic_field(seed, spec);
    const Cell nearest{static_cast<int>(std::lround(bumps[0].row)), static_cast<int>(std::lround(bumps[0].col))};
    if (!f.truth.contains(nearest)) continue;
    EXPECT_EQ(f.truth[nearest], 1.0) << "seed " << seed;
    ++checked;
  }
  EXPECT_GE(checked, 3);
}

TEST(Synthetic, RejectsBadSpec) {
  EXPECT_THROW(generate_synthetic_field(1, {8, 8, 0, 2.0}), Error);
  EXPECT_THROW(generate_synthetic_field(1, {8, 8, 2, 0.0}), Error);
}

TEST(Split, DisjointHalves) {
  std::vector<std::string> ids;
  for (int i = 0; i < 240; ++i) ids.push_back("i" + std::to_string(i));
  const auto s = split_instances(ids, 120, 120, 5);
  EXPECT_EQ(s.train.size(), 120u);
  EXPECT_EQ(s.test.size(), 120u);
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 240u);
}

TEST(Split, DisjointForManySeeds) {
  std::vector<std::string> ids;
  for (int i = 0; i < 50; ++i) ids.push_back("x" + std::to_string(i));
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto s = split_instances(ids, 20, 25, seed);
    std::set<std::string> train(s.train.begin(), s.train.end());
    for (const auto& t : s.test) ASSERT_FALSE(train.contains(t)) << "seed " << seed;
    ASSERT_EQ(train.size(), 20u);
  }
}

TEST(Split, EmptyTrainAndDeterminism) {
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  EXPECT_TRUE(split_instances(ids, 0, 2, 1).train.empty());
  EXPECT_EQ(split_instances(ids, 2, 2, 9).test, split_instances(ids, 2, 2, 9).test);
  EXPECT_THROW(split_instances(ids, 3, 2, 1), Error);
}

TEST(InstanceJson, BitExactRoundTrip) {
  auto inst = generate_synthetic_field(99, {7, 5, 3, 2.0});
  inst.truth(2, 3) = 0.1 + 0.2;  // not representable in short decimal
  inst.norm_offset = 1.0 / 3.0;
  const auto back = instance_from_json(instance_to_json(inst));
  EXPECT_EQ(back.id, inst.id);
  EXPECT_EQ(back.truth.height(), 7);
  EXPECT_EQ(back.truth.width(), 5);
  EXPECT_EQ(back.truth.values(), inst.truth.values());
  EXPECT_EQ(back.norm_offset, inst.norm_offset);
  EXPECT_EQ(back.norm_scale, inst.norm_scale);
}

TEST(Ingest, WellFormedRowAndEmptyColumn) {
  const auto dir = scratch_dir("row");
  write_locations(dir / "loc.txt", 3);
  {
    std::ofstream log(dir / "log.txt");
    log << "2004-02-28 00:58:46.002832 2 1 19.98 37.09 45.08 2.69\n";
    log << "2004-02-28 00:59:16.02785 3 2\n";  // attribute columns missing
  }
  IngestStats stats;
  const auto r = ingest_sensor_log(dir / "log.txt", dir / "loc.txt", Attribute::temperature, &stats);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0].value, 19.98);
  EXPECT_EQ(r[0].mote_id, 1);
  EXPECT_EQ(r[0].epoch, 2);
  EXPECT_EQ(stats.dropped_unparseable, 1u);
  const auto h = ingest_sensor_log(dir / "log.txt", dir / "loc.txt", Attribute::humidity);
  EXPECT_DOUBLE_EQ(h.at(0).value, 37.09);
}

TEST(Ingest, ThousandRowsThreeMalformed) {
  const auto dir = scratch_dir("k");
  write_locations(dir / "loc.txt", 10);
  {
    std::ofstream log(dir / "log.txt");
    for (int i = 0; i < 1000; ++i) {
      const int mote = 1 + i % 10;
      if (i == 17) {
        log << "2004-03-01 10:00:00 " << i << ' ' << mote << " abc 40.1 10 2.6\n";
      } else if (i == 400) {
        log << "2004-03-01 10:00:00 " << i << ' ' << mote << "\n";
      } else if (i == 999) {
        log << "2004-03-01 10:00:00 " << i << " x " << "21.0 40.1 10 2.6\n";
      } else {
        log << "2004-03-01 10:00:00 " << i / 10 << ' ' << mote << ' ' << 18.0 + 0.01 * i << " 40.1 10 2.6\n";
      }
    }
  }
  IngestStats stats;
  const auto r = ingest_sensor_log(dir / "log.txt", dir / "loc.txt", Attribute::temperature, &stats);
  EXPECT_EQ(r.size(), 997u);
  EXPECT_EQ(stats.rows, 1000u);
  EXPECT_EQ(stats.dropped_unparseable, 3u);
}

TEST(Ingest, UnknownMoteSkippedAndMissingFileFatal) {
  const auto dir = scratch_dir("unk");
  write_locations(dir / "loc.txt", 2);
  {
    std::ofstream log(dir / "log.txt");
    log << "2004-03-01 10:00:00 1 7 20.0 40 1 2\n";
  }
  IngestStats stats;
  EXPECT_TRUE(ingest_sensor_log(dir / "log.txt", dir / "loc.txt", Attribute::temperature, &stats).empty());
  EXPECT_EQ(stats.skipped_unknown_mote, 1u);
  EXPECT_THROW(ingest_sensor_log(dir / "nope.txt", dir / "loc.txt", Attribute::temperature), Error);
  EXPECT_THROW(ingest_sensor_log(dir / "log.txt", dir / "nope.txt", Attribute::temperature), Error);
}

TEST(FaultySensors, FiftyFourMotesFourFaulty) {
  std::vector<SensorReading> readings;
  for (int epoch = 0; epoch < 100; ++epoch) {
    for (int mote = 1; mote <= 54; ++mote) {
      double value = 20.0 + 0.1 * mote;
      if (mote == 5) value = 122.15;                     // stuck hot
      if (mote == 17 && epoch % 4 != 0) continue;        // mostly silent
      if (mote == 30 && epoch >= 30) value = -3.0;       // drifts out of range
      if (mote == 44 && epoch % 3 != 0) value = 60.0;    // intermittent garbage
      readings.push_back({"", epoch, mote, 0.0, 0.0, value});
    }
  }
  const auto r = filter_faulty_sensors(readings);
  EXPECT_EQ(r.kept.size(), 50u);
  EXPECT_EQ(r.dropped, (std::vector<int>{5, 17, 30, 44}));
}

TEST(FaultySensors, TooFewKeptIsFatal) {
  std::vector<SensorReading> readings;
  for (int mote = 1; mote <= 9; ++mote) readings.push_back({"", 0, mote, 0, 0, 20.0});
  EXPECT_THROW(filter_faulty_sensors(readings), Error);
  EXPECT_THROW(filter_faulty_sensors(readings, {5.0, 5.0}), Error);
}

TEST(Surrogate, ConstantMotesGiveZeroField) {
  std::vector<MoteSample> motes;
  for (int i = 0; i < 12; ++i) motes.push_back({1.0 * (i % 4) * 3, 2.0 * (i / 4) * 2, 21.5});
  const auto inst = build_surrogate_instance(motes);
  EXPECT_EQ(inst.truth.height(), 32);
  EXPECT_EQ(inst.truth.width(), 32);
  EXPECT_EQ(inst.norm_scale, 1.0);
  for (double v : inst.truth.values()) EXPECT_EQ(v, 0.0);
}

TEST(Surrogate, GradientSquareIsMonotone) {
  // Four corners of a 10 m square: low on one side, high on the other.
  std::vector<MoteSample> motes{{0, 0, 0.0}, {0, 10, 0.0}, {10, 0, 1.0}, {10, 10, 1.0}};
  SurrogateOptions opt;
  const auto inst = build_surrogate_instance(motes, opt);
  ASSERT_TRUE(inst.truth.all_finite());
  const auto& g = inst.truth;
  // x maps to columns: values must not decrease along the gradient axis.
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 1; c < g.width(); ++c) EXPECT_GE(g(r, c), g(r, c - 1) - 1e-12);
  }
  EXPECT_NEAR(g(0, 0), 0.0, 1e-9);
  EXPECT_NEAR(g(0, g.width() - 1), 1.0, 1e-9);
}

TEST(Surrogate, DuplicateCoordinatesArePerturbed) {
  std::vector<MoteSample> motes;
  for (int i = 0; i < 11; ++i) motes.push_back({2.0 * i, 1.0 * (i % 3), 18.0 + i});
  motes.push_back({0.0, 0.0, 30.0});  // same spot as mote 0
  const auto inst = build_surrogate_instance(motes);
  EXPECT_TRUE(inst.truth.all_finite());
}

TEST(Bilinear, CornersPreservedAndLinearExact) {
  GridField src(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) src(r, c) = 2.0 * r + c;
  const auto out = bilinear_resample(src, 5, 7);
  EXPECT_DOUBLE_EQ(out(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out(4, 6), 6.0);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 7; ++c) EXPECT_NEAR(out(r, c), 2.0 * (r * 0.5) + c * (2.0 / 6.0), 1e-12);
}

TEST(Snapshots, UniformAmongEligible) {
  std::vector<SensorReading> readings;
  for (int epoch = 0; epoch < 20; ++epoch) {
    const int reporting = epoch % 2 == 0 ? 12 : 5;
    for (int mote = 1; mote <= reporting; ++mote) readings.push_back({"", epoch, mote, 0, 0, 20.0});
  }
  std::vector<int> kept;
  for (int m = 1; m <= 12; ++m) kept.push_back(m);
  const auto e = select_snapshot_epochs(readings, kept, {0, 50}, 10, 4, 3);
  ASSERT_EQ(e.size(), 4u);
  for (auto x : e) EXPECT_EQ(x % 2, 0);
  EXPECT_EQ(e, select_snapshot_epochs(readings, kept, {0, 50}, 10, 4, 3));
  EXPECT_THROW(select_snapshot_epochs(readings, kept, {0, 50}, 10, 11, 3), Error);
}
