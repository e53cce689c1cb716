#include "ipp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ipp/svg.hpp"

namespace ipp::bench {

namespace fs = std::filesystem;

Profile parse_profile(const std::string& name) {
  if (name == "desk") {
    return Profile::desk;
  }
  if (name == "paper") {
    return Profile::paper;
  }
  throw Error("unknown profile '" + name + "' (expected desk or paper)");
}

ExperimentConfig ExperimentConfig::defaults(Profile profile) {
  ExperimentConfig c;
  c.profile = profile;
  if (profile == Profile::desk) {
    c.synthetic.h = 16;
    c.synthetic.w = 16;
    c.synthetic.length_scale = 3.0;
    c.dqn.total_interactions = 10000;
  } else {
    c.synthetic.h = 32;
    c.synthetic.w = 32;
    c.synthetic.length_scale = 6.0;
    c.dqn.total_interactions = 100000;
  }
  return c;
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& doc) {
  ExperimentConfig c = defaults(parse_profile(doc.get_string("profile", "desk")));
  auto u64 = [&](const std::string& key, std::uint64_t fallback) {
    const long v = doc.get_int(key, static_cast<long>(fallback));
    if (v < 0) {
      throw Error("config: " + key + " must be non-negative");
    }
    return static_cast<std::uint64_t>(v);
  };
  auto i32 = [&](const std::string& key, int fallback) { return static_cast<int>(doc.get_int(key, fallback)); };

  c.seed = u64("seed", c.seed);
  c.runs = i32("runs", c.runs);
  c.workers = i32("workers", c.workers);
  c.out_dir = doc.get_string("out_dir", c.out_dir.string());
  c.checkpoint_dir = doc.get_string("checkpoint_dir", c.checkpoint_dir.string());
  c.methods = doc.get_list("methods", c.methods);

  c.instance_dir = doc.get_string("instances.dir", c.instance_dir.string());
  c.synthetic_seed = u64("synthetic.seed", c.synthetic_seed);
  c.synthetic_count = i32("synthetic.count", c.synthetic_count);
  c.synthetic.h = i32("synthetic.height", c.synthetic.h);
  c.synthetic.w = i32("synthetic.width", c.synthetic.w);
  c.synthetic.n_bumps = i32("synthetic.bumps", c.synthetic.n_bumps);
  c.synthetic.length_scale = doc.get_double("synthetic.length_scale", c.synthetic.length_scale);

  c.n_train = i32("split.n_train", c.n_train);
  c.n_test = i32("split.n_test", c.n_test);
  c.split_seed = u64("split.seed", c.split_seed);

  c.mission.budget = i32("mission.budget", c.mission.budget);
  c.mission.n_lags = i32("mission.n_lags", c.mission.n_lags);
  c.mission.tsp_queue_init = i32("mission.tsp_queue_init", c.mission.tsp_queue_init);

  c.mixture_method = doc.get_string("mixture.method", c.mixture_method);
  c.mixture_probabilities = doc.get_doubles("mixture.probabilities", c.mixture_probabilities);

  c.dqn.total_interactions = i32("dqn.total_interactions", c.dqn.total_interactions);
  c.dqn.learning_rate = doc.get_double("dqn.learning_rate", c.dqn.learning_rate);
  c.dqn.batch_size = i32("dqn.batch_size", c.dqn.batch_size);
  c.dqn.buffer_capacity = i32("dqn.buffer_capacity", c.dqn.buffer_capacity);
  c.dqn.target_sync_interval = i32("dqn.target_sync_interval", c.dqn.target_sync_interval);
  c.dqn.train_frequency = i32("dqn.train_frequency", c.dqn.train_frequency);
  c.dqn.learning_starts = i32("dqn.learning_starts", c.dqn.learning_starts);
  c.dqn.discount = doc.get_double("dqn.discount", c.dqn.discount);
  c.dqn.exploration_fraction = doc.get_double("dqn.exploration_fraction", c.dqn.exploration_fraction);
  c.dqn.epsilon_start = doc.get_double("dqn.epsilon_start", c.dqn.epsilon_start);
  c.dqn.epsilon_end = doc.get_double("dqn.epsilon_end", c.dqn.epsilon_end);

  c.reward.c = doc.get_double("reward.c", c.reward.c);
  c.reward.beta = doc.get_double("reward.beta", c.reward.beta);
  c.reward.denominator_floor = doc.get_double("reward.floor", c.reward.denominator_floor);
  c.reward.scale = doc.get_double("reward.scale", c.reward.scale);
  return c;
}

void ExperimentConfig::validate() const {
  if (mission.budget < 4) {
    throw Error("config: budget T must be at least 4");
  }
  if (static_cast<int>(mission.seeds.size()) >= mission.budget) {
    throw Error("config: budget leaves no planner decisions after the seed samples");
  }
  if (runs < 1) {
    throw Error("config: runs must be at least 1");
  }
  if (methods.empty()) {
    throw Error("config: methods must be non-empty");
  }
  if (workers < 1) {
    throw Error("config: workers must be at least 1");
  }
  std::set<std::string> seen;
  for (const auto& m : methods) {
    if (!seen.insert(m).second) {
      throw Error("config: duplicate method " + m);
    }
    if (m == "empirical-mixture") {
      const auto set = rl::ActionSet::parse(mixture_method);
      if (static_cast<int>(mixture_probabilities.size()) != set.size()) {
        throw Error("config: mixture.probabilities must have one entry per action of " + mixture_method);
      }
    } else if (m.starts_with("RL-")) {
      rl::ActionSet::parse(m);
    } else {
      PlannerSpec::parse(m);
    }
  }
  if (n_train < 0 || n_test < 1) {
    throw Error("config: split sizes must be n_train >= 0, n_test >= 1");
  }
  if (instance_dir.empty() && n_train + n_test > synthetic_count) {
    throw Error("config: split needs more instances than synthetic.count");
  }
  dqn.validate();
}

nn::QNetArch ExperimentConfig::arch(int num_actions) const {
  return profile == Profile::desk ? nn::QNetArch::desk(num_actions, synthetic.h)
                                  : nn::QNetArch::paper(num_actions, synthetic.h);
}

fs::path ExperimentConfig::checkpoint_path(const std::string& method) const {
  const fs::path dir = checkpoint_dir.empty() ? out_dir / "checkpoints" : checkpoint_dir;
  return dir / (method + ".json");
}

Instances prepare_instances(const ExperimentConfig& config) {
  std::vector<FieldInstance> pool;
  if (config.instance_dir.empty()) {
    pool = generate_synthetic_suite(config.synthetic_seed, config.synthetic_count, config.synthetic);
  } else {
    if (!fs::is_directory(config.instance_dir)) {
      throw Error("instance directory not found: " + config.instance_dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(config.instance_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".json") {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      pool.push_back(load_instance(f));
    }
  }
  std::vector<std::string> ids;
  std::map<std::string, const FieldInstance*> by_id;
  for (const auto& inst : pool) {
    if (!by_id.emplace(inst.id, &inst).second) {
      throw Error("duplicate instance id " + inst.id);
    }
    ids.push_back(inst.id);
  }
  const InstanceSplit split = split_instances(ids, config.n_train, config.n_test, config.split_seed);
  Instances out;
  for (const auto& id : split.train) {
    out.train.push_back(*by_id.at(id));
  }
  for (const auto& id : split.test) {
    out.test.push_back(*by_id.at(id));
  }
  return out;
}

std::uint64_t mission_seed(std::uint64_t config_seed, const std::string& method, const std::string& instance_id,
                           int run) {
  return derive_seed(derive_seed(derive_seed(config_seed, method), instance_id), static_cast<std::uint64_t>(run));
}

namespace {

double quantize(double v) { return std::stod(format_number(v)); }

struct Job {
  std::size_t method = 0;
  std::size_t instance = 0;
  int run = 0;
};

}  // namespace

ResultsTable run_missions(const ExperimentConfig& config, const std::vector<FieldInstance>& instances,
                          const std::map<std::string, nn::QNetworkParams>& controllers) {
  config.validate();
  if (instances.empty()) {
    throw Error("run_missions: no instances");
  }

  // Resolve every method into a chooser (RL / mixture) or a fixed planner before starting threads.
  struct Method {
    std::string name;
    std::optional<PlannerSpec> planner;
    std::optional<rl::ActionSet> actions;
    rl::ActionChooser chooser;
  };
  std::vector<Method> methods;
  for (const auto& name : config.methods) {
    Method m{name, {}, {}, {}};
    if (name == "empirical-mixture") {
      m.actions = rl::ActionSet::parse(config.mixture_method);
      auto policy = std::make_shared<rl::EmpiricalMixturePolicy>(
          rl::EmpiricalMixturePolicy::marginal(config.mixture_probabilities));
      m.chooser = [policy](const rl::MdpState&, int step, Rng& rng) { return policy->sample(step, rng); };
    } else if (name.starts_with("RL-")) {
      m.actions = rl::ActionSet::parse(name);
      const auto it = controllers.find(name);
      if (it == controllers.end()) {
        throw Error("no trained controller for " + name + "; run `ipp_lab train` first");
      }
      if (it->second.arch.num_actions != m.actions->size()) {
        throw Error("controller for " + name + " has the wrong number of outputs");
      }
      m.chooser = rl::greedy_chooser(it->second);
    } else {
      m.planner = PlannerSpec::parse(name);
    }
    methods.push_back(std::move(m));
  }

  std::vector<Job> jobs;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (std::size_t ii = 0; ii < instances.size(); ++ii) {
      for (int run = 0; run < config.runs; ++run) {
        jobs.push_back({mi, ii, run});
      }
    }
  }

  std::vector<EpisodeTrace> traces(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const Job& job = jobs[j];
        const Method& m = methods[job.method];
        const FieldInstance& inst = instances[job.instance];
        const std::uint64_t seed = mission_seed(config.seed, m.name, inst.id, job.run);
        if (m.planner) {
          traces[j] = run_mission(inst, *m.planner, seed, config.mission);
        } else {
          traces[j] = rl::run_controller_mission(m.chooser, *m.actions, inst, seed, config.mission).trace;
          traces[j].method = m.name;
        }
        if (!(job.instance == 0 && job.run == 0)) {
          traces[j].maps.clear();
          traces[j].params.clear();
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        next = jobs.size();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = std::min<int>(config.workers, static_cast<int>(jobs.size()));
    for (int i = 1; i < n; ++i) {
      pool.emplace_back(worker);
    }
    worker();
  }
  if (error) {
    std::rethrow_exception(error);
  }

  // Jobs are already in (method, instance, run) order, so rows come out sorted.
  ResultsTable table;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const Job& job = jobs[j];
    const std::string& name = methods[job.method].name;
    for (const auto& step : traces[j].steps) {
      table.rows.push_back({name, job.run, instances[job.instance].id, step.t, quantize(step.rmse),
                            quantize(step.cumulative_distance), step.action_label});
    }
    if (methods[job.method].planner && methods[job.method].planner->kind == PlannerKind::gs_tsp) {
      table.tsp[name].push_back(traces[j].tsp);
    }
    if (job.instance == 0 && job.run == 0) {
      table.exemplars[name] = std::move(traces[j]);
    }
  }
  return table;
}

ResultsTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::map<std::string, nn::QNetworkParams> controllers;
  for (const auto& m : config.methods) {
    if (m.starts_with("RL-")) {
      const fs::path path = config.checkpoint_path(m);
      if (!fs::exists(path)) {
        throw Error("missing checkpoint " + path.string() + " for " + m + "; run `ipp_lab train` first");
      }
      const auto actions = rl::ActionSet::parse(m);
      controllers.emplace(m, rl::load_checkpoint(path, config.arch(actions.size())).params);
    }
  }
  const Instances inst = prepare_instances(config);
  return run_missions(config, inst.test, controllers);
}

std::vector<TrainedController> train_controllers(
    const ExperimentConfig& config, const std::function<void(const std::string&, long, const rl::TrainResult&)>& progress) {
  config.validate();
  const Instances inst = prepare_instances(config);
  if (inst.train.empty()) {
    throw Error("train: the split has no training instances");
  }
  std::vector<TrainedController> out;
  for (const auto& m : config.methods) {
    if (!m.starts_with("RL-")) {
      continue;
    }
    const auto actions = rl::ActionSet::parse(m);
    std::function<void(long, const rl::TrainResult&)> cb;
    if (progress) {
      cb = [&](long episode, const rl::TrainResult& r) { progress(m, episode, r); };
    }
    rl::TrainResult result = rl::train_dqn(inst.train, actions, config.arch(actions.size()), config.dqn,
                                           config.reward, derive_seed(config.seed, m), config.mission, cb);
    const fs::path path = config.checkpoint_path(m);
    fs::create_directories(path.parent_path());
    rl::save_checkpoint({result.params, m, config.reward, config.dqn}, path);
    out.push_back({m, std::move(result), path});
  }
  if (out.empty()) {
    throw Error("train: no RL-* methods in the config");
  }
  return out;
}

std::vector<std::vector<double>> action_history_matrix(const std::vector<EpisodeTrace>& traces,
                                                       const rl::ActionSet& actions) {
  std::vector<std::vector<double>> counts;
  std::vector<double> totals;
  for (const auto& tr : traces) {
    std::size_t step = 0;
    for (const auto& rec : tr.steps) {
      if (rec.action_label == "seed") {
        continue;
      }
      int a = 0;
      while (a < actions.size() && actions.actions[a].label() != rec.action_label) {
        ++a;
      }
      if (a == actions.size()) {
        throw Error("action_history_matrix: action " + rec.action_label + " is not in " + actions.method());
      }
      if (counts.size() <= step) {
        counts.resize(step + 1, std::vector<double>(static_cast<std::size_t>(actions.size()), 0.0));
        totals.resize(step + 1, 0.0);
      }
      counts[step][static_cast<std::size_t>(a)] += 1.0;
      totals[step] += 1.0;
      ++step;
    }
  }
  for (std::size_t s = 0; s < counts.size(); ++s) {
    for (double& c : counts[s]) {
      c /= totals[s];
    }
  }
  return counts;
}

std::vector<EpisodeTrace> traces_for(const ResultsTable& table, const std::string& method) {
  std::vector<EpisodeTrace> out;
  const ResultRow* prev = nullptr;
  for (const auto& row : table.rows) {
    if (row.method != method) {
      continue;
    }
    if (!prev || prev->instance != row.instance || prev->run != row.run) {
      out.emplace_back();
      out.back().instance_id = row.instance;
      out.back().method = method;
    }
    out.back().steps.push_back({row.t, row.action, {}, 0.0, row.rmse, row.distance});
    prev = &row;
  }
  return out;
}

namespace {

std::vector<std::string> method_order(const ResultsTable& table) {
  std::vector<std::string> order;
  for (const auto& row : table.rows) {
    if (order.empty() || order.back() != row.method) {
      if (std::find(order.begin(), order.end(), row.method) == order.end()) {
        order.push_back(row.method);
      }
    }
  }
  return order;
}

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  return out;
}

}  // namespace

Summary summarize(const ResultsTable& table, double alpha) {
  Summary summary;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> finals;
  const auto order = method_order(table);
  for (const auto& m : order) {
    std::vector<double> rmse, dist;
    for (const auto& tr : traces_for(table, m)) {
      rmse.push_back(tr.final_rmse());
      dist.push_back(tr.total_distance());
    }
    MethodSummary s;
    s.method = m;
    s.missions = static_cast<int>(rmse.size());
    s.rmse_mean = mean(rmse);
    s.rmse_std = stddev(rmse);
    s.distance_mean = mean(dist);
    s.distance_std = stddev(dist);
    if (const auto it = table.tsp.find(m); it != table.tsp.end() && !it->second.empty()) {
      std::vector<double> visits, ranks;
      for (const auto& ins : it->second) {
        visits.push_back(ins.random_origin_visits);
        for (double f : ins.kv_rank_fractions) {
          ranks.push_back(100.0 * f);
        }
      }
      s.random_origin_visits_mean = mean(visits);
      if (!ranks.empty()) {
        s.kv_rank_percent_mean = mean(ranks);
      }
    }
    summary.methods.push_back(s);
    finals[m] = {std::move(rmse), std::move(dist)};
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto& a = finals[order[i]];
      const auto& b = finals[order[j]];
      if (a.first.size() < 2 || b.first.size() < 2) {
        continue;
      }
      const TTestResult r1 = two_sample_t_test(a.first, b.first);
      summary.tests.push_back({order[i], order[j], "final_rmse", r1, r1.p < alpha});
      const TTestResult r2 = two_sample_t_test(a.second, b.second);
      summary.tests.push_back({order[i], order[j], "total_distance", r2, r2.p < alpha});
    }
  }
  return summary;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_results_csv(const ResultsTable& table, const fs::path& path) {
  auto out = open_out(path);
  out << "method,run,instance,t,rmse,distance,action\n";
  for (const auto& r : table.rows) {
    out << r.method << ',' << r.run << ',' << r.instance << ',' << r.t << ',' << format_number(r.rmse) << ','
        << format_number(r.distance) << ',' << r.action << '\n';
  }
}

ResultsTable read_results_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  std::string line;
  std::getline(in, line);
  if (line != "method,run,instance,t,rmse,distance,action") {
    throw Error(path.string() + ": unexpected header");
  }
  ResultsTable table;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      f.push_back(cell);
    }
    if (f.size() != 7) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected 7 fields");
    }
    try {
      table.rows.push_back({f[0], std::stoi(f[1]), f[2], std::stoi(f[3]), std::stod(f[4]), std::stod(f[5]), f[6]});
    } catch (const std::exception&) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return table;
}

void write_summary_csv(const Summary& summary, const fs::path& path) {
  auto out = open_out(path);
  out << "method,missions,final_rmse_mean,final_rmse_std,total_distance_mean,total_distance_std,"
         "random_origin_visits_mean,kv_rank_percent_mean\n";
  for (const auto& s : summary.methods) {
    out << s.method << ',' << s.missions << ',' << full_precision(s.rmse_mean) << ',' << full_precision(s.rmse_std)
        << ',' << full_precision(s.distance_mean) << ',' << full_precision(s.distance_std) << ','
        << (s.random_origin_visits_mean ? full_precision(*s.random_origin_visits_mean) : "") << ','
        << (s.kv_rank_percent_mean ? full_precision(*s.kv_rank_percent_mean) : "") << '\n';
  }
}

void write_significance_csv(const Summary& summary, const fs::path& path) {
  auto out = open_out(path);
  out << "method_a,method_b,metric,t,df,p,significant\n";
  for (const auto& t : summary.tests) {
    out << t.a << ',' << t.b << ',' << t.metric << ',' << format_number(t.test.t) << ',' << t.test.df << ','
        << format_number(t.test.p) << ',' << (t.significant ? "yes" : "no") << '\n';
  }
}

void write_actions_csv(const std::map<std::string, std::vector<std::vector<double>>>& matrices,
                       const std::map<std::string, rl::ActionSet>& action_sets, const fs::path& path) {
  auto out = open_out(path);
  out << "method,decision,action,frequency\n";
  for (const auto& [method, matrix] : matrices) {
    const auto& set = action_sets.at(method);
    for (std::size_t s = 0; s < matrix.size(); ++s) {
      for (std::size_t a = 0; a < matrix[s].size(); ++a) {
        out << method << ',' << s + 1 << ',' << set.actions[a].label() << ',' << format_number(matrix[s][a])
            << '\n';
      }
    }
  }
}

void write_learning_curve_csv(const std::vector<double>& episode_rewards, int window, const fs::path& path) {
  auto out = open_out(path);
  const auto rolled = rl::rolling_mean(episode_rewards, window);
  out << "episode,reward,rolling_mean\n";
  for (std::size_t i = 0; i < episode_rewards.size(); ++i) {
    out << i + 1 << ',' << format_number(episode_rewards[i]) << ',' << format_number(rolled[i]) << '\n';
  }
}

namespace {

// Action pool of an RL-style method; labels seen in the rows decide for anything else.
std::optional<rl::ActionSet> action_set_of(const std::string& method, const std::vector<EpisodeTrace>& traces) {
  if (method.starts_with("RL-")) {
    return rl::ActionSet::parse(method);
  }
  if (method != "empirical-mixture") {
    return std::nullopt;
  }
  std::set<std::string, std::greater<>> labels;
  for (const auto& tr : traces) {
    for (const auto& s : tr.steps) {
      if (s.action_label != "seed") {
        labels.insert(s.action_label);
      }
    }
  }
  rl::ActionSet set;
  for (const auto& l : labels) {
    set.actions.push_back(PlannerSpec::parse(l));
  }
  return set;
}

}  // namespace

void write_report(const ResultsTable& table, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_results_csv(table, out_dir / "results.csv");
  const Summary summary = summarize(table);
  write_summary_csv(summary, out_dir / "summary.csv");
  write_significance_csv(summary, out_dir / "significance.csv");

  std::map<std::string, std::vector<std::vector<double>>> matrices;
  std::map<std::string, rl::ActionSet> sets;
  std::vector<Series> rmse_curves, dist_curves;
  for (const auto& m : method_order(table)) {
    const auto traces = traces_for(table, m);
    if (const auto set = action_set_of(m, traces)) {
      matrices[m] = action_history_matrix(traces, *set);
      sets[m] = *set;
    }
    std::size_t len = 0;
    for (const auto& tr : traces) {
      len = std::max(len, tr.steps.size());
    }
    Series r{m, std::vector<double>(len, 0.0)}, d{m, std::vector<double>(len, 0.0)};
    std::vector<double> n(len, 0.0);
    for (const auto& tr : traces) {
      for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        r.y[i] += tr.steps[i].rmse;
        d.y[i] += tr.steps[i].cumulative_distance;
        n[i] += 1.0;
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      r.y[i] /= n[i];
      d.y[i] /= n[i];
    }
    rmse_curves.push_back(std::move(r));
    dist_curves.push_back(std::move(d));
  }
  write_actions_csv(matrices, sets, out_dir / "actions.csv");
  fs::create_directories(out_dir / "curves");
  emit_line_chart_svg("mean RMSE vs samples", rmse_curves, out_dir / "curves" / "rmse.svg");
  emit_line_chart_svg("mean travel distance vs samples", dist_curves, out_dir / "curves" / "distance.svg");
}

void write_heatmaps(const ResultsTable& table, const std::vector<FieldInstance>& instances, const fs::path& out_dir) {
  const fs::path dir = out_dir / "heatmaps";
  fs::create_directories(dir);
  std::set<std::string> truths;
  for (const auto& [method, trace] : table.exemplars) {
    if (trace.maps.empty()) {
      continue;
    }
    const Path path = trace.path();
    emit_heatmap_svg(trace.maps.back().mean, path, dir / (method + "_mean.svg"));
    emit_heatmap_svg(trace.maps.back().variance, path, dir / (method + "_variance.svg"));
    if (truths.insert(trace.instance_id).second) {
      for (const auto& inst : instances) {
        if (inst.id == trace.instance_id) {
          emit_heatmap_svg(inst.truth, {}, dir / (inst.id + "_truth.svg"));
        }
      }
    }
  }
}

}  // namespace ipp::bench
