#include "ipp/mission.hpp"

#include <json.hpp>

namespace ipp {

void apply_observation(MissionState& state, Cell cell, double value, int n_lags) {
  if (!state.visited.contains(cell)) {
    throw Error("apply_observation: waypoint out of bounds");
  }
  if (!state.path.empty()) {
    state.distance += distance(state.path.back(), cell);
  }
  state.path.push_back(cell);
  state.visited.mark(cell);
  state.samples.add(cell, value);
  state.params = fit_variogram(state.samples, n_lags);
  state.pmap = predict_map(state.samples, state.h, state.w, state.params);
}

Path EpisodeTrace::path() const {
  Path p;
  for (const auto& s : steps) {
    p.push_back(s.waypoint);
  }
  return p;
}

std::uint64_t step_planner_seed(std::uint64_t mission_seed, int t, const std::string& label) {
  return derive_seed(derive_seed(mission_seed, static_cast<std::uint64_t>(t)), label);
}

Cell plan_with(const PlannerSpec& spec, const MissionState& state, Rng& rng) {
  const PlannerContext ctx{state.position(), state.visited, &state.pmap, rng};
  switch (spec.kind) {
    case PlannerKind::random:
      return plan_random(ctx);
    case PlannerKind::gs:
      return plan_gs(ctx);
    case PlannerKind::ls:
      return plan_ls(ctx, ls_radius(spec.ls_level, state.w));
    case PlannerKind::gs_tsp:
      throw Error("plan_with: GS-TSP keeps a queue; drive it through run_mission");
  }
  throw Error("plan_with: unknown planner");
}

EpisodeTrace run_mission(const FieldInstance& instance, const PlannerSpec& policy, std::uint64_t seed,
                         const MissionOptions& options) {
  if (options.budget < 1) {
    throw Error("run_mission: budget must be positive");
  }
  Sensor sensor(instance);
  MissionState state(sensor.height(), sensor.width());
  EpisodeTrace trace;
  trace.instance_id = instance.id;
  trace.method = policy.label();

  auto record = [&](const std::string& label, Cell cell) {
    const double z = sensor.read(cell);
    apply_observation(state, cell, z, options.n_lags);
    trace.steps.push_back({state.t(), label, cell, z, sensor.score(state.pmap.mean), state.distance});
    trace.maps.push_back(state.pmap);
    trace.params.push_back(state.params);
  };

  for (const Cell& s : options.seeds) {
    if (state.t() >= options.budget) {
      break;
    }
    record("seed", s);
  }

  TspQueue queue;
  Rng tsp_init_rng(derive_seed(seed, "tsp-init"));
  while (state.t() < options.budget) {
    const int t = state.t() + 1;
    Rng rng(step_planner_seed(seed, t, policy.label()));
    if (policy.kind == PlannerKind::gs_tsp) {
      const PlannerContext ctx{state.position(), state.visited, &state.pmap,
                               queue.initialized ? rng : tsp_init_rng};
      // The first call draws the random queue entries and the noise from the init stream.
      const TspDecision d = plan_gs_tsp(ctx, queue, options.tsp_queue_init);
      if (d.tag == QueueTag::random_init) {
        ++trace.tsp.random_origin_visits;
      } else {
        trace.tsp.kv_rank_fractions.push_back(d.kv_rank_fraction);
      }
      record(policy.label(), d.cell);
    } else {
      record(policy.label(), plan_with(policy, state, rng));
    }
  }
  return trace;
}

std::string trace_to_json(const EpisodeTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : trace.steps) {
    steps.push_back({{"t", s.t},
                     {"action_label", s.action_label},
                     {"waypoint", {s.waypoint.row, s.waypoint.col}},
                     {"observation", s.observation},
                     {"rmse", s.rmse},
                     {"cumulative_distance", s.cumulative_distance}});
  }
  nlohmann::json j{{"instance", trace.instance_id}, {"method", trace.method}, {"steps", steps}};
  return j.dump(2);
}

}  // namespace ipp
