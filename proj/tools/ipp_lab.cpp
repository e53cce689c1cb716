// ipp_lab: instance preparation, baseline/RL missions, DQN training and reports.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "acceptance.hpp"
#include "ipp/bench.hpp"
#include "ipp/svg.hpp"

namespace fs = std::filesystem;
using namespace ipp;

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> workers;
  std::string profile;
};

bench::ExperimentConfig resolve(const GlobalFlags& g) {
  KeyValueConfig doc;
  if (!g.config.empty()) {
    doc = KeyValueConfig::load(g.config);
  }
  if (!g.profile.empty()) {
    doc.set("profile", "\"" + g.profile + "\"");
  }
  bench::ExperimentConfig cfg = bench::ExperimentConfig::from(doc);
  if (g.seed) {
    cfg.seed = *g.seed;
  }
  if (!g.out_dir.empty()) {
    cfg.out_dir = g.out_dir;
  }
  if (g.workers) {
    cfg.workers = *g.workers;
  }
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_ingest(const GlobalFlags& g, const std::string& log, const std::string& locations,
               const std::string& attribute, int snapshots, int min_reporting) {
  const auto cfg = resolve(g);
  const Attribute attr = attribute == "humidity" ? Attribute::humidity : Attribute::temperature;
  if (attribute != "humidity" && attribute != "temperature") {
    throw Error("--attribute must be temperature or humidity");
  }
  IngestStats stats;
  const auto readings = ingest_sensor_log(log, locations, attr, &stats);
  std::printf("rows %zu, parsed %zu, dropped %zu unparseable, %zu unknown mote\n", stats.rows, readings.size(),
              stats.dropped_unparseable, stats.skipped_unknown_mote);
  const std::pair<double, double> range = attr == Attribute::temperature ? std::pair{0.0, 50.0} : std::pair{0.0, 100.0};
  const auto filtered = filter_faulty_sensors(readings, range);
  std::printf("motes kept %zu, dropped %zu\n", filtered.kept.size(), filtered.dropped.size());

  const auto epochs = select_snapshot_epochs(readings, filtered.kept, range, min_reporting, snapshots, cfg.seed);
  const fs::path dir = cfg.out_dir / "instances";
  fs::create_directories(dir);
  for (std::int64_t epoch : epochs) {
    std::vector<MoteSample> motes;
    for (const auto& r : readings) {
      if (r.epoch == epoch && r.value > range.first && r.value < range.second &&
          std::binary_search(filtered.kept.begin(), filtered.kept.end(), r.mote_id)) {
        motes.push_back({r.x, r.y, r.value});
      }
    }
    SurrogateOptions opt;
    opt.out_h = cfg.synthetic.h;
    opt.out_w = cfg.synthetic.w;
    opt.id = attribute + "-" + std::to_string(epoch);
    const FieldInstance inst = build_surrogate_instance(motes, opt);
    save_instance(inst, dir / (inst.id + ".json"));
  }
  std::printf("wrote %zu instances to %s\n", epochs.size(), dir.string().c_str());
  return 0;
}

int cmd_make_synthetic(const GlobalFlags& g, std::optional<int> count) {
  auto cfg = resolve(g);
  const int n = count.value_or(cfg.synthetic_count);
  const auto suite = generate_synthetic_suite(cfg.synthetic_seed, n, cfg.synthetic);
  const fs::path dir = cfg.out_dir / "instances";
  fs::create_directories(dir);
  for (const auto& inst : suite) {
    save_instance(inst, dir / (inst.id + ".json"));
  }
  std::printf("wrote %d %dx%d instances to %s\n", n, cfg.synthetic.h, cfg.synthetic.w, dir.string().c_str());
  return 0;
}

int cmd_split(const GlobalFlags& g) {
  const auto cfg = resolve(g);
  const auto inst = bench::prepare_instances(cfg);
  nlohmann::json j;
  j["seed"] = cfg.split_seed;
  j["train"] = nlohmann::json::array();
  j["test"] = nlohmann::json::array();
  for (const auto& i : inst.train) {
    j["train"].push_back(i.id);
  }
  for (const auto& i : inst.test) {
    j["test"].push_back(i.id);
  }
  fs::create_directories(cfg.out_dir);
  std::ofstream(cfg.out_dir / "split.json") << j.dump(2) << "\n";
  std::printf("train %zu, test %zu -> %s\n", inst.train.size(), inst.test.size(),
              (cfg.out_dir / "split.json").string().c_str());
  return 0;
}

int cmd_run(const GlobalFlags& g) {
  const auto cfg = resolve(g);
  const auto t0 = std::chrono::steady_clock::now();
  const auto table = bench::run_experiment(cfg);
  bench::write_report(table, cfg.out_dir);
  bench::write_heatmaps(table, bench::prepare_instances(cfg).test, cfg.out_dir);
  for (const auto& s : bench::summarize(table).methods) {
    std::printf("%-18s rmse %.4f +- %.4f   distance %8.2f +- %7.2f\n", s.method.c_str(), s.rmse_mean, s.rmse_std,
                s.distance_mean, s.distance_std);
  }
  std::printf("%zu rows in %.1fs -> %s\n", table.rows.size(), seconds_since(t0), cfg.out_dir.string().c_str());
  return 0;
}

int cmd_train(const GlobalFlags& g) {
  const auto cfg = resolve(g);
  const auto t0 = std::chrono::steady_clock::now();
  const auto trained = bench::train_controllers(cfg, [&](const std::string& m, long episode, const rl::TrainResult& r) {
    if (episode % 200 == 0) {
      std::fprintf(stderr, "[%s] episode %ld, %ld interactions, %ld updates, %.0fs\n", m.c_str(), episode,
                   r.interactions, r.updates, seconds_since(t0));
    }
  });
  for (const auto& t : trained) {
    const auto& rewards = t.result.episode_rewards;
    bench::write_learning_curve_csv(rewards, 50, cfg.out_dir / ("learning_" + t.method + ".csv"));
    fs::create_directories(cfg.out_dir / "curves");
    emit_line_chart_svg("episode reward (rolling mean, 50) " + t.method, {{t.method, rl::rolling_mean(rewards, 50)}},
                        cfg.out_dir / "curves" / ("reward_" + t.method + ".svg"));
    std::printf("%s: %zu episodes, %ld updates -> %s\n", t.method.c_str(), rewards.size(), t.result.updates,
                t.checkpoint.string().c_str());
  }
  return 0;
}

int cmd_report(const GlobalFlags& g, const std::string& results) {
  const auto cfg = resolve(g);
  const fs::path in = results.empty() ? cfg.out_dir / "results.csv" : fs::path(results);
  const auto table = bench::read_results_csv(in);
  bench::write_report(table, cfg.out_dir);
  for (const auto& s : bench::summarize(table).methods) {
    std::printf("%-18s n=%d rmse %.4f distance %.2f\n", s.method.c_str(), s.missions, s.rmse_mean, s.distance_mean);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Informative path planning lab: kriging planners and RL controllers"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "key = value config document")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "experiment seed");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--workers", g.workers, "concurrent missions")->check(CLI::PositiveNumber);
  app.add_option("--profile", g.profile, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));

  auto* ingest = app.add_subcommand("ingest", "sensor log -> surrogate instance files");
  std::string log, locations, attribute = "temperature";
  int snapshots = 10, min_reporting = 45;
  ingest->add_option("--log", log)->required()->check(CLI::ExistingFile);
  ingest->add_option("--locations", locations)->required()->check(CLI::ExistingFile);
  ingest->add_option("--attribute", attribute)->check(CLI::IsMember({"temperature", "humidity"}));
  ingest->add_option("--snapshots", snapshots);
  ingest->add_option("--min-reporting", min_reporting);

  auto* synth = app.add_subcommand("make-synthetic", "write synthetic instances");
  std::optional<int> count;
  synth->add_option("--count", count);

  auto* split = app.add_subcommand("split", "write the train/test split");
  auto* run = app.add_subcommand("run", "run all configured methods on the test split");
  auto* train = app.add_subcommand("train", "train DQN controllers for the RL-* methods");
  auto* report = app.add_subcommand("report", "summaries, significance and curves from results.csv");
  std::string results;
  report->add_option("--results", results)->check(CLI::ExistingFile);
  auto* selftest = app.add_subcommand("selftest", "acceptance suite");
  std::string filter;
  selftest->add_option("--filter", filter, "only criteria whose name contains this");

  for (auto* sub : {ingest, synth, split, run, train, report, selftest}) {
    sub->fallthrough();
  }
  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      return cmd_ingest(g, log, locations, attribute, snapshots, min_reporting);
    }
    if (*synth) {
      return cmd_make_synthetic(g, count);
    }
    if (*split) {
      return cmd_split(g);
    }
    if (*run) {
      return cmd_run(g);
    }
    if (*train) {
      return cmd_train(g);
    }
    if (*report) {
      return cmd_report(g, results);
    }
    if (*selftest) {
      acceptance::Options opt;
      opt.seed = g.seed.value_or(opt.seed);
      opt.workers = g.workers.value_or(opt.workers);
      opt.scratch = g.out_dir.empty() ? fs::temp_directory_path() / "ipp_selftest" : fs::path(g.out_dir);
      opt.filter = filter;
      return acceptance::run(opt, std::cout) == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
