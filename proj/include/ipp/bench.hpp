#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipp/config.hpp"
#include "ipp/field_model.hpp"
#include "ipp/mission.hpp"
#include "ipp/rl.hpp"
#include "ipp/stats.hpp"

namespace ipp::bench {

enum class Profile { desk, paper };

Profile parse_profile(const std::string& name);

struct ExperimentConfig {
  Profile profile = Profile::desk;
  std::filesystem::path instance_dir;  // empty: generate synthetic instances
  std::uint64_t synthetic_seed = 1;
  int synthetic_count = 240;
  SyntheticSpec synthetic;
  int n_train = 120;
  int n_test = 120;
  std::uint64_t split_seed = 0;
  std::vector<std::string> methods{"Rand", "GS", "GS-TSP", "LS-1", "LS-2", "LS-3"};
  MissionOptions mission;
  int runs = 3;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  std::filesystem::path checkpoint_dir;  // empty: out_dir / "checkpoints"
  int workers = 1;
  std::string mixture_method = "RL-21";
  std::vector<double> mixture_probabilities{0.62, 0.38};
  rl::DqnConfig dqn;
  rl::RewardParams reward;

  static ExperimentConfig defaults(Profile profile);
  /// Defaults for the document's `profile` key, overridden by any keys present.
  static ExperimentConfig from(const KeyValueConfig& doc);
  void validate() const;

  nn::QNetArch arch(int num_actions) const;
  std::filesystem::path checkpoint_path(const std::string& method) const;
};

struct Instances {
  std::vector<FieldInstance> train;
  std::vector<FieldInstance> test;
};

/// Loads (or generates) the instance pool and applies the configured split.
Instances prepare_instances(const ExperimentConfig& config);

struct ResultRow {
  std::string method;
  int run = 0;
  std::string instance;
  int t = 0;
  double rmse = 0.0;
  double distance = 0.0;
  std::string action;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  std::map<std::string, std::vector<TspInstrumentation>> tsp;
  /// First mission (first instance, run 0) of each method, with prediction maps, for heatmaps.
  std::map<std::string, EpisodeTrace> exemplars;
};

std::uint64_t mission_seed(std::uint64_t config_seed, const std::string& method, const std::string& instance_id,
                           int run);

/// Runs every (method, instance, run) mission over the given instances. RL methods need trained
/// parameters in `controllers` keyed by method name.
ResultsTable run_missions(const ExperimentConfig& config, const std::vector<FieldInstance>& instances,
                          const std::map<std::string, nn::QNetworkParams>& controllers = {});

/// Full experiment on the test split; loads RL checkpoints from the checkpoint directory.
ResultsTable run_experiment(const ExperimentConfig& config);

struct TrainedController {
  std::string method;
  rl::TrainResult result;
  std::filesystem::path checkpoint;
};

/// Trains every RL-* method listed in the config on the train split and saves checkpoints.
std::vector<TrainedController> train_controllers(
    const ExperimentConfig& config, const std::function<void(const std::string&, long, const rl::TrainResult&)>& progress = {});

/// Writes heatmaps/<method>_truth.svg style panels for each exemplar trace.
void write_heatmaps(const ResultsTable& table, const std::vector<FieldInstance>& instances,
                    const std::filesystem::path& out_dir);

/// Rows = decision steps, columns = actions (in action-set order); entries are selection frequencies.
std::vector<std::vector<double>> action_history_matrix(const std::vector<EpisodeTrace>& traces,
                                                       const rl::ActionSet& actions);

/// Re-assembles per-mission traces of one method from the table (steps only).
std::vector<EpisodeTrace> traces_for(const ResultsTable& table, const std::string& method);

struct MethodSummary {
  std::string method;
  int missions = 0;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double distance_mean = 0.0;
  double distance_std = 0.0;
  std::optional<double> random_origin_visits_mean;
  std::optional<double> kv_rank_percent_mean;
};

struct PairwiseTest {
  std::string a;
  std::string b;
  std::string metric;  // "final_rmse" or "total_distance"
  TTestResult test;
  bool significant = false;  // p < .05
};

struct Summary {
  std::vector<MethodSummary> methods;
  std::vector<PairwiseTest> tests;
};

Summary summarize(const ResultsTable& table, double alpha = 0.05);

std::string format_number(double v);  // 9 significant digits
void write_results_csv(const ResultsTable& table, const std::filesystem::path& path);
ResultsTable read_results_csv(const std::filesystem::path& path);
void write_summary_csv(const Summary& summary, const std::filesystem::path& path);
void write_significance_csv(const Summary& summary, const std::filesystem::path& path);
void write_actions_csv(const std::map<std::string, std::vector<std::vector<double>>>& matrices,
                       const std::map<std::string, rl::ActionSet>& action_sets, const std::filesystem::path& path);
void write_learning_curve_csv(const std::vector<double>& episode_rewards, int window,
                              const std::filesystem::path& path);

/// results.csv, summary.csv, significance.csv, actions.csv and per-step curves under out_dir.
void write_report(const ResultsTable& table, const std::filesystem::path& out_dir);

}  // namespace ipp::bench
