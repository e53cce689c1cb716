#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ipp/mission.hpp"
#include "ipp/nn.hpp"

namespace ipp::rl {

/// Controller input: last prediction mean and variance, a one-hot position plane, and t / T.
struct MdpState {
  GridField mean;
  GridField variance;
  Cell position;
  double t_norm = 0.0;

  GridField position_plane() const;
  /// (M, V, P) stacked channel-major, as consumed by the Q-network.
  std::vector<double> planes() const;
};

MdpState make_state(const PredictionMap& pmap, Cell position, int t, int budget);

/// The low-level planners an RL-K controller chooses among, e.g. RL-21 = {LS-2, LS-1}.
struct ActionSet {
  std::vector<PlannerSpec> actions;

  static ActionSet parse(const std::string& method);  // "RL-32", "RL-21", "RL-321"
  std::string method() const;
  int size() const { return static_cast<int>(actions.size()); }
};

struct RewardParams {
  double c = 1.0;
  double beta = 4.0 * std::exp(1.0);
  double denominator_floor = 1e-6;
  /// Multiplier applied to rewards before they enter the replay buffer.
  double scale = std::pow(2.0, -4.0 * std::exp(1.0));
};

/// t_norm / max(C - rmse, floor)^beta, signed by delta (delta >= 0 counts as positive).
double reward(double delta, double rmse_t, double t_norm, const RewardParams& params);

/// min over alternatives of RMSE(alternative outcome) - chosen_rmse. Each alternative plans from
/// pre with its own rng substream for step t; pre is never modified.
double hallucinate_delta(const MissionState& pre, int chosen, const ActionSet& actions, double chosen_rmse,
                         Sensor& sensor, std::uint64_t mission_seed, const MissionOptions& options);

struct StepResult {
  std::optional<MdpState> next;  // empty at terminal
  double reward = 0.0;           // unscaled
  double delta = 0.0;
  bool done = false;
  Cell waypoint;
  double rmse = 0.0;
};

/// One sampling mission seen as an MDP. In training mode each step hallucinates the unchosen
/// actions to compute a reward; in evaluation mode rewards are 0 and truth is only read at the
/// visited cell and for scoring.
class IppEnv {
 public:
  IppEnv(ActionSet actions, MissionOptions options = {}, RewardParams reward = {}, bool training = true);

  MdpState reset(const FieldInstance& instance, std::uint64_t mission_seed);
  StepResult step(int action);

  bool done() const;
  MdpState state() const;
  const MissionState& mission() const { return mission_; }
  const EpisodeTrace& trace() const { return trace_; }
  const Sensor& sensor() const { return *sensor_; }
  const ActionSet& actions() const { return actions_; }

 private:
  ActionSet actions_;
  MissionOptions options_;
  RewardParams reward_;
  bool training_;
  std::unique_ptr<Sensor> sensor_;
  MissionState mission_;
  EpisodeTrace trace_;
  std::uint64_t mission_seed_ = 0;
  bool active_ = false;
};

/// Uniform random action with probability epsilon, else argmax (first index on ties).
int epsilon_greedy(std::span<const double> q_values, double epsilon, Rng& rng);

struct DqnConfig {
  double discount = 0.99;
  int buffer_capacity = 50000;
  int batch_size = 32;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double exploration_fraction = 0.3;
  int target_sync_interval = 1000;
  double learning_rate = 1e-4;
  int total_interactions = 100000;
  int train_frequency = 4;
  int learning_starts = 100;

  void validate() const;
  double epsilon_at(long step) const;
};

/// Replay entry; grids are stored in single precision to bound memory at paper scale.
struct StoredState {
  std::vector<float> mean;
  std::vector<float> variance;
  int h = 0;
  int w = 0;
  Cell position;
  double t_norm = 0.0;

  static std::shared_ptr<const StoredState> from(const MdpState& s);
  std::vector<double> planes() const;
};

struct Transition {
  std::shared_ptr<const StoredState> state;
  int action = 0;
  double reward = 0.0;  // scaled
  std::shared_ptr<const StoredState> next;  // null at terminal
  bool done = false;
};

/// FIFO experience replay with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

/// Online/target network pair with an Adam optimizer.
class DqnLearner {
 public:
  DqnLearner(const nn::QNetArch& arch, const DqnConfig& config, std::uint64_t seed);
  DqnLearner(nn::QNetworkParams params, const DqnConfig& config);

  std::vector<double> q_values(const MdpState& s) const;
  /// Mean squared TD error over the batch before the update; terminal targets are y = r.
  double update(const std::vector<const Transition*>& batch);
  double td_error(const Transition& t) const;
  void sync_target() { target_ = online_; }

  const nn::QNetworkParams& params() const { return online_; }

 private:
  double target_value(const Transition& t) const;

  DqnConfig config_;
  nn::QNetworkParams online_;
  nn::QNetworkParams target_;
  nn::Adam adam_;
};

struct TrainResult {
  nn::QNetworkParams params;
  std::vector<double> episode_rewards;  // unscaled sum per completed episode
  long interactions = 0;
  long updates = 0;
};

TrainResult train_dqn(const std::vector<FieldInstance>& train, const ActionSet& actions, const nn::QNetArch& arch,
                      const DqnConfig& config, const RewardParams& reward, std::uint64_t seed,
                      const MissionOptions& options = {},
                      const std::function<void(long, const TrainResult&)>& progress = {});

/// Trailing rolling mean (window clipped at the start).
std::vector<double> rolling_mean(const std::vector<double>& values, int window);

struct EvalResult {
  std::vector<EpisodeTrace> traces;
  std::vector<double> mean_rmse_per_step;      // index t-1
  std::vector<double> mean_distance_per_step;  // index t-1
  std::vector<std::vector<double>> action_frequencies;  // [decision step][action]
  long truth_point_reads = 0;
  long truth_score_reads = 0;
};

/// Chooses an action index for the current decision. step is 0 for the first decision.
using ActionChooser = std::function<int(const MdpState&, int step, Rng&)>;

struct ControllerMission {
  EpisodeTrace trace;
  long truth_point_reads = 0;
  long truth_score_reads = 0;
};

/// One evaluation-mode mission driven by choose; the controller rng derives from mission_seed.
ControllerMission run_controller_mission(const ActionChooser& choose, const ActionSet& actions,
                                         const FieldInstance& instance, std::uint64_t mission_seed,
                                         const MissionOptions& options = {});

/// Greedy action of a Q-network.
ActionChooser greedy_chooser(const nn::QNetworkParams& params);

EvalResult evaluate_controller(const ActionChooser& choose, const ActionSet& actions,
                               const std::vector<FieldInstance>& test, int n_runs, std::uint64_t seed,
                               const MissionOptions& options = {});

/// Greedy rollouts of a trained network.
EvalResult evaluate_policy(const nn::QNetworkParams& params, const ActionSet& actions,
                           const std::vector<FieldInstance>& test, int n_runs, std::uint64_t seed,
                           const MissionOptions& options = {});

/// Context-free controller drawing actions from per-step (or a single marginal) distribution.
class EmpiricalMixturePolicy {
 public:
  explicit EmpiricalMixturePolicy(std::vector<std::vector<double>> per_step);
  static EmpiricalMixturePolicy marginal(std::vector<double> probabilities);

  int sample(int step, Rng& rng) const;
  const std::vector<double>& probabilities(int step) const;

 private:
  std::vector<std::vector<double>> rows_;
};

struct Checkpoint {
  nn::QNetworkParams params;
  std::string method;
  RewardParams reward;
  DqnConfig config;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws if the stored architecture fingerprint differs from expected_arch (when given).
Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<nn::QNetArch>& expected_arch = {});

}  // namespace ipp::rl
