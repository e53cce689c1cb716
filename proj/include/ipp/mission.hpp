#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ipp/field_model.hpp"
#include "ipp/kriging.hpp"
#include "ipp/planners.hpp"

namespace ipp {

/// The only path from a mission to ground truth. Point reads model the robot's sensor; full-field
/// reads are reserved for scoring. Both are counted so callers can audit truth access.
class Sensor {
 public:
  explicit Sensor(const FieldInstance& instance) : instance_(&instance) {}

  double read(Cell c) {
    ++point_reads_;
    return instance_->truth[c];
  }
  double score(const GridField& prediction) {
    ++score_reads_;
    return rmse(prediction, instance_->truth);
  }

  int height() const { return instance_->truth.height(); }
  int width() const { return instance_->truth.width(); }
  long point_reads() const { return point_reads_; }
  long score_reads() const { return score_reads_; }

 private:
  const FieldInstance* instance_;
  long point_reads_ = 0;
  long score_reads_ = 0;
};

struct MissionOptions {
  int budget = 15;  // T
  std::vector<Cell> seeds{{1, 1}, {2, 2}, {3, 3}};
  int n_lags = 6;
  int tsp_queue_init = 5;
};

/// Everything a planner or controller may look at during a mission. Copyable, so counterfactual
/// branches can be simulated on a copy.
struct MissionState {
  int h = 0;
  int w = 0;
  SampleSet samples;
  VisitMask visited;
  Path path;
  double distance = 0.0;
  VariogramParams params;
  PredictionMap pmap;

  MissionState() = default;
  MissionState(int height, int width) : h(height), w(width), visited(height, width) {}

  int t() const { return static_cast<int>(samples.size()); }
  Cell position() const { return path.back(); }
};

/// Moves to cell, records value, refits the variogram and recomputes the prediction map.
void apply_observation(MissionState& state, Cell cell, double value, int n_lags);

struct StepRecord {
  int t = 0;
  std::string action_label;
  Cell waypoint;
  double observation = 0.0;
  double rmse = 0.0;
  double cumulative_distance = 0.0;
};

struct TspInstrumentation {
  int random_origin_visits = 0;
  std::vector<double> kv_rank_fractions;  // kv_selected entries only
};

struct EpisodeTrace {
  std::string instance_id;
  std::string method;
  std::vector<StepRecord> steps;
  std::vector<PredictionMap> maps;  // after each step
  std::vector<VariogramParams> params;
  TspInstrumentation tsp;

  Path path() const;
  double final_rmse() const { return steps.back().rmse; }
  double total_distance() const { return steps.back().cumulative_distance; }
};

/// Seed for the rng a planner uses at step t; keyed by label so alternative planners draw from
/// independent substreams.
std::uint64_t step_planner_seed(std::uint64_t mission_seed, int t, const std::string& label);

/// Chooses the next waypoint for a single-planner policy.
Cell plan_with(const PlannerSpec& spec, const MissionState& state, Rng& rng);

/// Runs the seeds and then a fixed planner until the budget is spent.
EpisodeTrace run_mission(const FieldInstance& instance, const PlannerSpec& policy, std::uint64_t seed,
                         const MissionOptions& options = {});

std::string trace_to_json(const EpisodeTrace& trace);

}  // namespace ipp
