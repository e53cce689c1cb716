#include "ipp/rl.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace ipp::rl {

GridField MdpState::position_plane() const {
  GridField p(mean.height(), mean.width(), 0.0);
  p[position] = 1.0;
  return p;
}

std::vector<double> MdpState::planes() const {
  const std::size_t n = mean.size();
  std::vector<double> out(3 * n, 0.0);
  std::copy(mean.values().begin(), mean.values().end(), out.begin());
  std::copy(variance.values().begin(), variance.values().end(), out.begin() + static_cast<std::ptrdiff_t>(n));
  out[2 * n + static_cast<std::size_t>(position.row) * mean.width() + position.col] = 1.0;
  return out;
}

MdpState make_state(const PredictionMap& pmap, Cell position, int t, int budget) {
  if (!pmap.mean.contains(position)) {
    throw Error("make_state: position out of bounds");
  }
  if (budget < 1 || t < 1 || t > budget) {
    throw Error("make_state: step outside [1, T]");
  }
  return {pmap.mean, pmap.variance, position, static_cast<double>(t) / budget};
}

ActionSet ActionSet::parse(const std::string& method) {
  if (!method.starts_with("RL-") || method.size() < 5) {
    throw Error("ActionSet: expected RL-<levels>, got " + method);
  }
  ActionSet set;
  for (char ch : method.substr(3)) {
    if (ch < '1' || ch > '9') {
      throw Error("ActionSet: bad level in " + method);
    }
    const PlannerSpec spec = PlannerSpec::ls(ch - '0');
    if (std::find(set.actions.begin(), set.actions.end(), spec) != set.actions.end()) {
      throw Error("ActionSet: duplicate action in " + method);
    }
    set.actions.push_back(spec);
  }
  if (set.size() < 2 || set.size() > 3) {
    throw Error("ActionSet: need 2 or 3 actions");
  }
  return set;
}

std::string ActionSet::method() const {
  std::string m = "RL-";
  for (const auto& a : actions) {
    m += std::to_string(a.ls_level);
  }
  return m;
}

double reward(double delta, double rmse_t, double t_norm, const RewardParams& params) {
  const double base = std::max(params.c - rmse_t, params.denominator_floor);
  const double sign = delta >= 0.0 ? 1.0 : -1.0;
  return t_norm / std::pow(base, params.beta) * sign;
}

double hallucinate_delta(const MissionState& pre, int chosen, const ActionSet& actions, double chosen_rmse,
                         Sensor& sensor, std::uint64_t mission_seed, const MissionOptions& options) {
  if (chosen < 0 || chosen >= actions.size()) {
    throw Error("hallucinate_delta: chosen action out of range");
  }
  const int t = pre.t() + 1;
  const Cell chosen_cell = [&] {
    Rng rng(step_planner_seed(mission_seed, t, actions.actions[chosen].label()));
    return plan_with(actions.actions[chosen], pre, rng);
  }();
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < actions.size(); ++a) {
    if (a == chosen) {
      continue;
    }
    Rng rng(step_planner_seed(mission_seed, t, actions.actions[a].label()));
    const Cell cell = plan_with(actions.actions[a], pre, rng);
    double alt_rmse = chosen_rmse;
    if (cell != chosen_cell) {
      MissionState branch = pre;
      apply_observation(branch, cell, sensor.read(cell), options.n_lags);
      alt_rmse = sensor.score(branch.pmap.mean);
    }
    best = std::min(best, alt_rmse);
  }
  return best - chosen_rmse;
}

IppEnv::IppEnv(ActionSet actions, MissionOptions options, RewardParams reward, bool training)
    : actions_(std::move(actions)), options_(std::move(options)), reward_(reward), training_(training) {
  if (actions_.size() < 1) {
    throw Error("IppEnv: empty action set");
  }
}

MdpState IppEnv::reset(const FieldInstance& instance, std::uint64_t mission_seed) {
  sensor_ = std::make_unique<Sensor>(instance);
  mission_ = MissionState(sensor_->height(), sensor_->width());
  trace_ = EpisodeTrace{};
  trace_.instance_id = instance.id;
  trace_.method = actions_.method();
  mission_seed_ = mission_seed;
  for (const Cell& s : options_.seeds) {
    if (mission_.t() >= options_.budget) {
      break;
    }
    const double z = sensor_->read(s);
    apply_observation(mission_, s, z, options_.n_lags);
    trace_.steps.push_back({mission_.t(), "seed", s, z, sensor_->score(mission_.pmap.mean), mission_.distance});
    trace_.maps.push_back(mission_.pmap);
    trace_.params.push_back(mission_.params);
  }
  active_ = true;
  if (done()) {
    throw Error("IppEnv: budget leaves no decisions after the seeds");
  }
  return state();
}

bool IppEnv::done() const { return mission_.t() >= options_.budget; }

MdpState IppEnv::state() const {
  return make_state(mission_.pmap, mission_.position(), mission_.t() + 1, options_.budget);
}

StepResult IppEnv::step(int action) {
  if (!active_ || done()) {
    throw Error("IppEnv::step called on a finished or unstarted episode");
  }
  if (action < 0 || action >= actions_.size()) {
    throw Error("IppEnv::step: action out of range");
  }
  const PlannerSpec& spec = actions_.actions[action];
  const int t = mission_.t() + 1;
  std::optional<MissionState> pre;
  if (training_) {
    pre = mission_;
  }
  Rng rng(step_planner_seed(mission_seed_, t, spec.label()));
  const Cell cell = plan_with(spec, mission_, rng);
  const double z = sensor_->read(cell);
  apply_observation(mission_, cell, z, options_.n_lags);

  StepResult result;
  result.waypoint = cell;
  result.rmse = sensor_->score(mission_.pmap.mean);
  if (training_) {
    result.delta = hallucinate_delta(*pre, action, actions_, result.rmse, *sensor_, mission_seed_, options_);
    result.reward = reward(result.delta, result.rmse, static_cast<double>(t) / options_.budget, reward_);
  }
  trace_.steps.push_back({t, spec.label(), cell, z, result.rmse, mission_.distance});
  trace_.maps.push_back(mission_.pmap);
  trace_.params.push_back(mission_.params);
  result.done = done();
  if (!result.done) {
    result.next = state();
  }
  return result;
}

int epsilon_greedy(std::span<const double> q_values, double epsilon, Rng& rng) {
  if (q_values.empty()) {
    throw Error("epsilon_greedy: no actions");
  }
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(q_values.size()) - 1);
      return pick(rng);
    }
  }
  return static_cast<int>(std::max_element(q_values.begin(), q_values.end()) - q_values.begin());
}

void DqnConfig::validate() const {
  if (!(discount >= 0.0 && discount <= 1.0) || buffer_capacity < 1 || batch_size < 1 || target_sync_interval < 1 ||
      !(learning_rate > 0.0) || total_interactions < 1 || train_frequency < 1 || learning_starts < 0 ||
      !(epsilon_start >= 0.0 && epsilon_start <= 1.0) || !(epsilon_end >= 0.0 && epsilon_end <= 1.0) ||
      !(exploration_fraction > 0.0 && exploration_fraction <= 1.0)) {
    throw Error("DqnConfig: invalid configuration");
  }
}

double DqnConfig::epsilon_at(long step) const {
  const double horizon = exploration_fraction * total_interactions;
  const double frac = std::min(1.0, static_cast<double>(step) / horizon);
  return epsilon_start + frac * (epsilon_end - epsilon_start);
}

std::shared_ptr<const StoredState> StoredState::from(const MdpState& s) {
  auto out = std::make_shared<StoredState>();
  out->mean.assign(s.mean.values().begin(), s.mean.values().end());
  out->variance.assign(s.variance.values().begin(), s.variance.values().end());
  out->h = s.mean.height();
  out->w = s.mean.width();
  out->position = s.position;
  out->t_norm = s.t_norm;
  return out;
}

std::vector<double> StoredState::planes() const {
  const std::size_t n = mean.size();
  std::vector<double> out(3 * n, 0.0);
  std::copy(mean.begin(), mean.end(), out.begin());
  std::copy(variance.begin(), variance.end(), out.begin() + static_cast<std::ptrdiff_t>(n));
  out[2 * n + static_cast<std::size_t>(position.row) * w + position.col] = 1.0;
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw Error("ReplayBuffer: capacity must be positive");
  }
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() == capacity_) {
    items_.pop_front();
  }
  items_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) {
    throw Error("ReplayBuffer: sampling from an empty buffer");
  }
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(&items_[pick(rng)]);
  }
  return out;
}

DqnLearner::DqnLearner(const nn::QNetArch& arch, const DqnConfig& config, std::uint64_t seed)
    : DqnLearner(nn::QNetworkParams::initialize(arch, seed), config) {}

DqnLearner::DqnLearner(nn::QNetworkParams params, const DqnConfig& config)
    : config_(config),
      online_(std::move(params)),
      target_(online_),
      adam_(online_, nn::AdamConfig{config.learning_rate}) {
  config_.validate();
}

std::vector<double> DqnLearner::q_values(const MdpState& s) const {
  const auto planes = s.planes();
  return nn::forward(online_, planes, s.t_norm);
}

double DqnLearner::target_value(const Transition& t) const {
  if (t.done || !t.next) {
    return t.reward;
  }
  const auto planes = t.next->planes();
  const auto q = nn::forward(target_, planes, t.next->t_norm);
  return t.reward + config_.discount * *std::max_element(q.begin(), q.end());
}

double DqnLearner::td_error(const Transition& t) const {
  const auto planes = t.state->planes();
  const auto q = nn::forward(online_, planes, t.state->t_norm);
  return target_value(t) - q[static_cast<std::size_t>(t.action)];
}

double DqnLearner::update(const std::vector<const Transition*>& batch) {
  if (batch.empty()) {
    return 0.0;
  }
  nn::Gradients grads(online_.arch);
  nn::ForwardCache cache;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  std::vector<double> d_out(static_cast<std::size_t>(online_.arch.num_actions));
  for (const Transition* t : batch) {
    const double y = target_value(*t);
    const auto planes = t->state->planes();
    const auto q = nn::forward(online_, planes, t->state->t_norm, &cache);
    const double err = q[static_cast<std::size_t>(t->action)] - y;
    loss += err * err * inv_n;
    std::fill(d_out.begin(), d_out.end(), 0.0);
    d_out[static_cast<std::size_t>(t->action)] = 2.0 * err * inv_n;
    nn::backward(online_, cache, d_out, grads);
  }
  adam_.step(online_, grads);
  return loss;
}

TrainResult train_dqn(const std::vector<FieldInstance>& train, const ActionSet& actions, const nn::QNetArch& arch,
                      const DqnConfig& config, const RewardParams& reward_params, std::uint64_t seed,
                      const MissionOptions& options, const std::function<void(long, const TrainResult&)>& progress) {
  if (train.empty()) {
    throw Error("train_dqn: empty training set");
  }
  config.validate();
  if (arch.num_actions != actions.size()) {
    throw Error("train_dqn: network output size differs from the action count");
  }
  DqnLearner learner(arch, config, derive_seed(seed, "init"));
  ReplayBuffer buffer(static_cast<std::size_t>(config.buffer_capacity));
  Rng rng(derive_seed(seed, "train"));
  IppEnv env(actions, options, reward_params, true);
  std::uniform_int_distribution<std::size_t> pick_instance(0, train.size() - 1);

  TrainResult result{learner.params(), {}, 0, 0};
  long episode = 0;
  while (result.interactions < config.total_interactions) {
    const FieldInstance& inst = train[pick_instance(rng)];
    MdpState s = env.reset(inst, derive_seed(seed, static_cast<std::uint64_t>(episode)));
    auto stored = StoredState::from(s);
    double episode_reward = 0.0;
    bool finished = false;
    while (result.interactions < config.total_interactions) {
      const auto q = learner.q_values(s);
      const int a = epsilon_greedy(q, config.epsilon_at(result.interactions), rng);
      StepResult step = env.step(a);
      episode_reward += step.reward;
      Transition tr;
      tr.state = stored;
      tr.action = a;
      tr.reward = step.reward * reward_params.scale;
      tr.done = step.done;
      if (step.next) {
        tr.next = StoredState::from(*step.next);
      }
      buffer.push(tr);
      ++result.interactions;

      if (result.interactions >= config.learning_starts && result.interactions % config.train_frequency == 0) {
        learner.update(buffer.sample(static_cast<std::size_t>(config.batch_size), rng));
        ++result.updates;
      }
      if (result.interactions % config.target_sync_interval == 0) {
        learner.sync_target();
      }
      if (step.done) {
        finished = true;
        break;
      }
      s = std::move(*step.next);
      stored = tr.next;
    }
    if (finished) {
      result.episode_rewards.push_back(episode_reward);
    }
    ++episode;
    if (progress) {
      progress(episode, result);
    }
  }
  result.params = learner.params();
  return result;
}

std::vector<double> rolling_mean(const std::vector<double>& values, int window) {
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) {
      sum -= values[i - static_cast<std::size_t>(window)];
    }
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window)));
  }
  return out;
}

ControllerMission run_controller_mission(const ActionChooser& choose, const ActionSet& actions,
                                         const FieldInstance& instance, std::uint64_t mission_seed,
                                         const MissionOptions& options) {
  IppEnv env(actions, options, {}, false);
  Rng rng(derive_seed(mission_seed, "controller"));
  MdpState s = env.reset(instance, mission_seed);
  for (int step = 0;; ++step) {
    StepResult r = env.step(choose(s, step, rng));
    if (r.done) {
      break;
    }
    s = std::move(*r.next);
  }
  return {env.trace(), env.sensor().point_reads(), env.sensor().score_reads()};
}

ActionChooser greedy_chooser(const nn::QNetworkParams& params) {
  return [&params](const MdpState& s, int, Rng&) {
    const auto planes = s.planes();
    const auto q = nn::forward(params, planes, s.t_norm);
    return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
  };
}

EvalResult evaluate_controller(const ActionChooser& choose, const ActionSet& actions,
                               const std::vector<FieldInstance>& test, int n_runs, std::uint64_t seed,
                               const MissionOptions& options) {
  if (test.empty() || n_runs < 1) {
    throw Error("evaluate: need test instances and at least one run");
  }
  EvalResult result;
  const std::size_t budget = static_cast<std::size_t>(options.budget);
  result.mean_rmse_per_step.assign(budget, 0.0);
  result.mean_distance_per_step.assign(budget, 0.0);
  for (const auto& inst : test) {
    for (int run = 0; run < n_runs; ++run) {
      const std::uint64_t mission_seed = derive_seed(derive_seed(seed, inst.id), static_cast<std::uint64_t>(run));
      ControllerMission m = run_controller_mission(choose, actions, inst, mission_seed, options);
      result.truth_point_reads += m.truth_point_reads;
      result.truth_score_reads += m.truth_score_reads;
      result.traces.push_back(std::move(m.trace));
    }
  }
  const double n = static_cast<double>(result.traces.size());
  for (const auto& tr : result.traces) {
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
      result.mean_rmse_per_step[i] += tr.steps[i].rmse / n;
      result.mean_distance_per_step[i] += tr.steps[i].cumulative_distance / n;
    }
    int step = 0;
    for (const auto& rec : tr.steps) {
      if (rec.action_label == "seed") {
        continue;
      }
      if (result.action_frequencies.size() <= static_cast<std::size_t>(step)) {
        result.action_frequencies.resize(static_cast<std::size_t>(step) + 1,
                                         std::vector<double>(static_cast<std::size_t>(actions.size()), 0.0));
      }
      for (int a = 0; a < actions.size(); ++a) {
        if (actions.actions[a].label() == rec.action_label) {
          result.action_frequencies[static_cast<std::size_t>(step)][static_cast<std::size_t>(a)] += 1.0 / n;
        }
      }
      ++step;
    }
  }
  return result;
}

EvalResult evaluate_policy(const nn::QNetworkParams& params, const ActionSet& actions,
                           const std::vector<FieldInstance>& test, int n_runs, std::uint64_t seed,
                           const MissionOptions& options) {
  if (params.arch.num_actions != actions.size()) {
    throw Error("evaluate_policy: network output size differs from the action count");
  }
  return evaluate_controller(greedy_chooser(params), actions, test, n_runs, seed, options);
}

EmpiricalMixturePolicy::EmpiricalMixturePolicy(std::vector<std::vector<double>> per_step) : rows_(std::move(per_step)) {
  if (rows_.empty()) {
    throw Error("EmpiricalMixturePolicy: no probabilities");
  }
  for (const auto& row : rows_) {
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (row.empty() || std::abs(sum - 1.0) > 1e-9 ||
        std::any_of(row.begin(), row.end(), [](double p) { return p < 0.0; })) {
      throw Error("EmpiricalMixturePolicy: each row must be a probability distribution");
    }
  }
}

EmpiricalMixturePolicy EmpiricalMixturePolicy::marginal(std::vector<double> probabilities) {
  return EmpiricalMixturePolicy({std::move(probabilities)});
}

const std::vector<double>& EmpiricalMixturePolicy::probabilities(int step) const {
  return rows_[std::min(static_cast<std::size_t>(std::max(step, 0)), rows_.size() - 1)];
}

int EmpiricalMixturePolicy::sample(int step, Rng& rng) const {
  const auto& p = probabilities(step);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (x < acc) {
      return static_cast<int>(i);
    }
  }
  // Rounding can leave acc just below 1; fall back to the last action with mass.
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) {
      return static_cast<int>(i);
    }
  }
  return 0;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json j = nn::params_to_json(ckpt.params);
  j["format"] = "ipp-qnet";
  j["version"] = 1;
  j["method"] = ckpt.method;
  j["reward"] = {{"c", ckpt.reward.c},
                 {"beta", ckpt.reward.beta},
                 {"denominator_floor", ckpt.reward.denominator_floor},
                 {"scale", ckpt.reward.scale}};
  j["dqn"] = {{"discount", ckpt.config.discount},
              {"buffer_capacity", ckpt.config.buffer_capacity},
              {"batch_size", ckpt.config.batch_size},
              {"target_sync_interval", ckpt.config.target_sync_interval},
              {"learning_rate", ckpt.config.learning_rate},
              {"total_interactions", ckpt.config.total_interactions},
              {"train_frequency", ckpt.config.train_frequency}};
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write checkpoint: " + path.string());
  }
  out << j.dump();
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<nn::QNetArch>& expected_arch) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open checkpoint: " + path.string());
  }
  const auto j = nlohmann::json::parse(in);
  if (j.value("format", std::string()) != "ipp-qnet" || j.value("version", 0) != 1) {
    throw Error("unrecognized checkpoint format: " + path.string());
  }
  Checkpoint ckpt;
  ckpt.params = nn::params_from_json(j);
  if (expected_arch && expected_arch->fingerprint() != ckpt.params.arch.fingerprint()) {
    throw Error("checkpoint architecture fingerprint mismatch: " + path.string());
  }
  ckpt.method = j.at("method").get<std::string>();
  const auto& r = j.at("reward");
  ckpt.reward = {r.at("c").get<double>(), r.at("beta").get<double>(), r.at("denominator_floor").get<double>(),
                 r.at("scale").get<double>()};
  const auto& d = j.at("dqn");
  ckpt.config.discount = d.at("discount").get<double>();
  ckpt.config.buffer_capacity = d.at("buffer_capacity").get<int>();
  ckpt.config.batch_size = d.at("batch_size").get<int>();
  ckpt.config.target_sync_interval = d.at("target_sync_interval").get<int>();
  ckpt.config.learning_rate = d.at("learning_rate").get<double>();
  ckpt.config.total_interactions = d.at("total_interactions").get<int>();
  ckpt.config.train_frequency = d.at("train_frequency").get<int>();
  return ckpt;
}

}  // namespace ipp::rl
