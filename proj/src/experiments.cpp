#include "rss/experiments.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

namespace rss {

namespace fs = std::filesystem;
using json = nlohmann::json;

void Scenario::validate() const {
  require(!seeds.empty(), "Scenario: seeds list must be nonempty");
  require(search_trials >= 1, "Scenario: search_trials must be >= 1");
  require(search_epochs >= 1 && final_epochs >= 1, "Scenario: epoch counts must be >= 1");
  require(unlabeled_search_cap >= 1, "Scenario: unlabeled_search_cap must be >= 1");
  require(inner_steps >= 0, "Scenario: inner_steps must be >= 0");
  require(!output_dir.empty(), "Scenario: output_dir required");
  if (mode == Mode::Embeddings) {
    require(fs::exists(labeled_csv), "Scenario: labeled embeddings file not found: " + labeled_csv);
    require(fs::exists(unlabeled_csv),
            "Scenario: unlabeled embeddings file not found: " + unlabeled_csv);
  } else {
    require(d >= 1, "Scenario: d must be >= 1");
    require(mu0_norm > 0.0 && sigma0 > 0.0, "Scenario: mu0_norm and sigma0 must be > 0");
    require(alpha >= 0.0, "Scenario: alpha must be >= 0");
    require(!labeled_sizes.empty(), "Scenario: labeled_sizes must be nonempty");
    require(!unlabeled_sizes.empty(), "Scenario: unlabeled_sizes must be nonempty");
    for (int m : labeled_sizes) require(m >= 2, "Scenario: labeled sizes must be >= 2");
    for (int n : unlabeled_sizes) require(n >= 1, "Scenario: unlabeled sizes must be >= 1");
    require(test_size >= 1, "Scenario: test_size must be >= 1");
    require(validation_size >= 1, "Scenario: validation_size must be >= 1");
    if (mode == Mode::SimulatedGeneral)
      require(static_cast<int>(general_eigenvalues.size()) == d,
              "Scenario: general_eigenvalues must list d eigenvalues");
  }
}

namespace {

const char* mode_name(Scenario::Mode mode) {
  switch (mode) {
    case Scenario::Mode::SimulatedIso: return "simulated-iso";
    case Scenario::Mode::SimulatedGeneral: return "simulated-general";
    default: return "embeddings";
  }
}

Scenario::Mode mode_from_name(const std::string& name) {
  if (name == "simulated-iso") return Scenario::Mode::SimulatedIso;
  if (name == "simulated-general") return Scenario::Mode::SimulatedGeneral;
  if (name == "embeddings") return Scenario::Mode::Embeddings;
  throw Error("Scenario: unknown mode '" + name + "'");
}

}  // namespace

Scenario Scenario::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("Scenario: cannot open " + path);
  json j = json::parse(in);
  Scenario sc;
  sc.id = j.value("id", sc.id);
  sc.mode = mode_from_name(j.value("mode", "simulated-iso"));
  sc.d = j.value("d", sc.d);
  sc.mu0_norm = j.value("mu0_norm", sc.mu0_norm);
  sc.sigma0 = j.value("sigma0", sc.sigma0);
  sc.alpha = j.value("alpha", sc.alpha);
  sc.spec_seed = j.value("spec_seed", sc.spec_seed);
  sc.general_eigenvalues = j.value("general_eigenvalues", sc.general_eigenvalues);
  sc.labeled_csv = j.value("labeled_csv", sc.labeled_csv);
  sc.unlabeled_csv = j.value("unlabeled_csv", sc.unlabeled_csv);
  if (j.contains("label_map"))
    for (auto& [k, v] : j.at("label_map").items()) sc.label_map[k] = v.get<int>();
  sc.labeled_sizes = j.value("labeled_sizes", sc.labeled_sizes);
  sc.unlabeled_sizes = j.value("unlabeled_sizes", sc.unlabeled_sizes);
  sc.test_size = j.value("test_size", sc.test_size);
  sc.validation_size = j.value("validation_size", sc.validation_size);
  sc.search_trials = j.value("search_trials", sc.search_trials);
  sc.search_epochs = j.value("search_epochs", sc.search_epochs);
  sc.final_epochs = j.value("final_epochs", sc.final_epochs);
  sc.unlabeled_search_cap = j.value("unlabeled_search_cap", sc.unlabeled_search_cap);
  sc.inner_steps = j.value("inner_steps", sc.inner_steps);
  sc.model_kind = j.value("model", std::string("linear")) == "mlp" ? ModelSpec::Kind::Mlp
                                                                   : ModelSpec::Kind::Linear;
  sc.mlp_hidden = j.value("mlp_hidden", sc.mlp_hidden);
  sc.seeds = j.value("seeds", sc.seeds);
  sc.output_dir = j.value("output_dir", sc.output_dir);
  sc.threads = j.value("threads", sc.threads);
  sc.validate();
  return sc;
}

void Scenario::to_json_file(const std::string& path) const {
  json j{{"id", id},
         {"mode", mode_name(mode)},
         {"d", d},
         {"mu0_norm", mu0_norm},
         {"sigma0", sigma0},
         {"alpha", alpha},
         {"spec_seed", spec_seed},
         {"general_eigenvalues", general_eigenvalues},
         {"labeled_csv", labeled_csv},
         {"unlabeled_csv", unlabeled_csv},
         {"labeled_sizes", labeled_sizes},
         {"unlabeled_sizes", unlabeled_sizes},
         {"test_size", test_size},
         {"validation_size", validation_size},
         {"search_trials", search_trials},
         {"search_epochs", search_epochs},
         {"final_epochs", final_epochs},
         {"unlabeled_search_cap", unlabeled_search_cap},
         {"inner_steps", inner_steps},
         {"model", model_kind == ModelSpec::Kind::Mlp ? "mlp" : "linear"},
         {"mlp_hidden", mlp_hidden},
         {"seeds", seeds},
         {"output_dir", output_dir},
         {"threads", threads}};
  json map = json::object();
  for (const auto& [k, v] : label_map) map[k] = v;
  j["label_map"] = map;
  std::ofstream out(path);
  if (!out) throw Error("Scenario: cannot open " + path);
  out << j.dump(2) << "\n";
}

namespace {

struct Job {
  int m = 0;
  int n = 0;  // 0 for ERM
  bool rss = false;
  std::uint64_t seed = 0;
  std::size_t slot = 0;
};

struct SharedData {
  // embeddings mode only: preloaded, read-only
  LabeledSet labeled;
  UnlabeledSet unlabeled;
  LabeledSet test;
  bool loaded = false;
};

GmmSpec scenario_spec(const Scenario& sc) {
  Rng rng(mix_seed(sc.spec_seed, 0x737065ULL));
  const Vector mu0 = sc.mu0_norm * rng.unit_vector(sc.d);
  GmmSpec base;
  if (sc.mode == Scenario::Mode::SimulatedGeneral) {
    const Matrix cov = spd_from_eigenvalues(sc.general_eigenvalues, mix_seed(sc.spec_seed, 2));
    base = GmmSpec::general(mu0, cov);
  } else {
    base = GmmSpec::isotropic(mu0, sc.sigma0);
  }
  if (sc.alpha > 0.0) base = make_shifted_spec(base, sc.alpha, mix_seed(sc.spec_seed, 3));
  return base;
}

}  // namespace

TrainConfig trial_train_config(const Scenario& sc, const TrialConfig& t, int epochs, bool rss,
                               std::uint64_t train_seed) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_split = 2;
  c.learning_rate = t.lr();
  c.weight_decay = t.weight_decay();
  // plain SGD recovers the eigen-structure the self-labeled term targets;
  // per-parameter scaling helps the MLP head instead
  c.adaptive = sc.model_kind == ModelSpec::Kind::Mlp;
  c.robust.gamma = t.gamma();
  c.robust.gamma_prime = t.gamma_prime();
  c.robust.lambda = rss ? t.lambda() : 0.0;
  c.robust.inner.steps = rss ? sc.inner_steps : 0;
  c.robust.inner.alpha = t.alpha();
  c.seed = train_seed;
  c.model.kind = sc.model_kind;
  c.model.normalize = sc.model_kind == ModelSpec::Kind::Linear;
  c.model.hidden = sc.mlp_hidden;
  return c;
}

namespace {

LabeledSet take_rows(const LabeledSet& src, const std::vector<int>& rows) {
  LabeledSet out;
  out.features.resize(static_cast<int>(rows.size()), src.d());
  out.labels.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<int>(i)) = src.features.row(rows[i]);
    out.labels[static_cast<int>(i)] = src.labels[rows[i]];
  }
  return out;
}

UnlabeledSet head_rows(const UnlabeledSet& src, int count) {
  UnlabeledSet out;
  const int take = std::min(count, src.n());
  out.features = src.features.topRows(take);
  return out;
}

// Validation accuracy of one trial: 20% holdout when m >= 20, leave-one-out
// otherwise.
double validation_score(const Scenario& sc, const TrialConfig& t, const LabeledSet& labeled,
                        const UnlabeledSet& unlabeled_cap, bool rss, std::uint64_t job_seed) {
  const int m = labeled.m();
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed(job_seed, 0x76616cULL));
  rng.shuffle(perm);

  auto run_fold = [&](const std::vector<int>& train_rows, const std::vector<int>& val_rows) {
    const LabeledSet train = take_rows(labeled, train_rows);
    const LabeledSet val = take_rows(labeled, val_rows);
    const TrainConfig cfg = trial_train_config(sc, t, sc.search_epochs, rss, mix_seed(job_seed, 0x66ULL));
    const TrainReport rep = rss ? train_rss(train, unlabeled_cap, cfg, &val)
                                : train_erm(train, cfg, &val);
    return std::pair<double, int>{rep.test_accuracy * val.m(), val.m()};
  };

  double correct = 0.0;
  int total = 0;
  if (m >= 20) {
    const int val_count = std::max(1, m / 5);
    std::vector<int> val_rows(perm.begin(), perm.begin() + val_count);
    std::vector<int> train_rows(perm.begin() + val_count, perm.end());
    const auto [c, n] = run_fold(train_rows, val_rows);
    correct += c;
    total += n;
  } else {
    for (int i = 0; i < m; ++i) {
      std::vector<int> val_rows{perm[i]};
      std::vector<int> train_rows;
      for (int jj = 0; jj < m; ++jj)
        if (jj != i) train_rows.push_back(perm[jj]);
      const auto [c, n] = run_fold(train_rows, val_rows);
      correct += c;
      total += n;
    }
  }
  return correct / total;
}

}  // namespace

SearchResult search_hyperparams(const Scenario& knobs, const LabeledSet& labeled,
                                const UnlabeledSet& unlabeled, bool rss, std::uint64_t seed,
                                const LabeledSet* validation) {
  const SearchSpace space;
  return random_search(
      space, knobs.search_trials,
      [&](const TrialConfig& t) {
        if (validation != nullptr) {
          const TrainConfig cfg =
              trial_train_config(knobs, t, knobs.search_epochs, rss, mix_seed(seed, 0x66ULL));
          const TrainReport rep =
              rss ? train_rss(labeled, unlabeled, cfg, validation) : train_erm(labeled, cfg, validation);
          return rep.test_accuracy;
        }
        return validation_score(knobs, t, labeled, unlabeled, rss, seed);
      },
      seed);
}

namespace {

std::string run_tag(const Job& job) {
  return "m" + std::to_string(job.m) + "_n" + std::to_string(job.n) + "_" +
         (job.rss ? "RSS" : "ERM") + "_seed" + std::to_string(job.seed);
}

RunRow execute_job(const Scenario& sc, const Job& job, const SharedData& shared) {
  RunRow row;
  row.labeled_size = job.m;
  row.unlabeled_size = job.n;
  row.method = job.rss ? "RSS" : "ERM";
  row.seed = job.seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    LabeledSet labeled, test, validation;
    bool has_validation = false;
    UnlabeledSet unlabeled;
    if (sc.mode == Scenario::Mode::Embeddings) {
      labeled = shared.labeled;
      unlabeled = shared.unlabeled;
      test = shared.test;
    } else {
      const GmmSpec spec = scenario_spec(sc);
      labeled = sample_labeled(spec, job.m, mix_seed(job.seed, mix_seed(0x6c616265ULL, job.m)));
      test = sample_labeled_balanced(spec, sc.test_size, mix_seed(job.seed, 0x74657374ULL));
      validation = sample_labeled(spec, sc.validation_size, mix_seed(job.seed, 0x76736574ULL));
      has_validation = true;
      if (job.rss) {
        unlabeled = sample_unlabeled(
            spec, job.n, mix_seed(job.seed, mix_seed(0x756e6cULL, job.m * 131071 + job.n)));
      } else {
        unlabeled.features.resize(0, labeled.d());
      }
    }

    const UnlabeledSet search_unlabeled =
        job.rss ? head_rows(unlabeled, sc.unlabeled_search_cap) : unlabeled;
    const std::uint64_t job_seed = mix_seed(job.seed, mix_seed(0x6a6f62ULL, job.m * 524287 + job.n));

    const SearchResult search = search_hyperparams(sc, labeled, search_unlabeled, job.rss,
                                                   job_seed, has_validation ? &validation : nullptr);

    fs::create_directories(fs::path(sc.output_dir) / "trials");
    write_trial_log_csv(search,
                        (fs::path(sc.output_dir) / "trials" / (run_tag(job) + ".csv")).string());

    const TrainConfig final_cfg =
        trial_train_config(sc, search.best, sc.final_epochs, job.rss, mix_seed(job_seed, 0x66ULL));
    const TrainReport rep = job.rss ? train_rss(labeled, unlabeled, final_cfg, &test)
                                    : train_erm(labeled, final_cfg, &test);

    fs::create_directories(fs::path(sc.output_dir) / "reports");
    const std::string stem = (fs::path(sc.output_dir) / "reports" / run_tag(job)).string();
    write_train_report(rep, stem + ".json", stem + ".epochs.csv");
    save_model(rep.model, stem + ".model.csv");
    write_train_config_json(final_cfg, stem + ".config.json");

    row.accuracy = rep.test_accuracy;
    row.chosen = search.best;
    row.validation_score = search.best_score;
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  row.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

void append_csv_double(std::string& line, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), ",%.10g", v);
  line += buf;
}

std::string sanitize_error(std::string msg) {
  for (char& c : msg)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return msg;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario) {
  scenario.validate();
  fs::create_directories(scenario.output_dir);

  SharedData shared;
  std::vector<int> labeled_sizes = scenario.labeled_sizes;
  std::vector<int> unlabeled_sizes = scenario.unlabeled_sizes;
  if (scenario.mode == Scenario::Mode::Embeddings) {
    auto [lab, unl] = ingest_embeddings(scenario.labeled_csv, scenario.unlabeled_csv,
                                        scenario.label_map);
    // hold out a test share when no separate test file exists
    std::vector<int> perm(lab.m());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(mix_seed(scenario.spec_seed, 0x656d62ULL));
    rng.shuffle(perm);
    const int test_count = std::max(1, lab.m() * 3 / 10);
    std::vector<int> test_rows(perm.begin(), perm.begin() + test_count);
    std::vector<int> train_rows(perm.begin() + test_count, perm.end());
    shared.test = take_rows(lab, test_rows);
    shared.labeled = take_rows(lab, train_rows);
    shared.unlabeled = unl;
    shared.loaded = true;
    labeled_sizes = {shared.labeled.m()};
    unlabeled_sizes = {shared.unlabeled.n()};
  }

  std::vector<Job> jobs;
  for (int m : labeled_sizes) {
    for (const std::uint64_t seed : scenario.seeds)
      jobs.push_back(Job{m, 0, false, seed, jobs.size()});
    for (int n : unlabeled_sizes)
      for (const std::uint64_t seed : scenario.seeds)
        jobs.push_back(Job{m, n, true, seed, jobs.size()});
  }

  std::vector<RunRow> runs(jobs.size());
  std::atomic<std::size_t> next{0};
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min(jobs.size(), scenario.threads > 0 ? std::size_t(scenario.threads) : hw);
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) break;
      runs[jobs[k].slot] = execute_job(scenario, jobs[k], shared);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ScenarioResult result;
  result.runs = runs;
  for (const RunRow& r : runs) result.all_ok = result.all_ok && r.ok;

  // aggregate per (m, n, method) in job construction order
  std::vector<std::pair<int, int>> cells;
  for (int m : labeled_sizes) {
    cells.push_back({m, 0});
    for (int n : unlabeled_sizes) cells.push_back({m, n});
  }
  for (const auto& [m, n] : cells) {
    const std::string method = n == 0 ? "ERM" : "RSS";
    std::vector<const RunRow*> group;
    for (const RunRow& r : runs)
      if (r.labeled_size == m && r.unlabeled_size == n && r.method == method && r.ok)
        group.push_back(&r);
    ResultRow row;
    row.scenario_id = scenario.id;
    row.labeled_size = m;
    row.unlabeled_size = n;
    row.method = method;
    row.ok = !group.empty();
    if (!group.empty()) {
      std::vector<double> accs;
      for (auto* r : group) accs.push_back(r->accuracy);
      std::sort(accs.begin(), accs.end());
      const double mean = std::accumulate(accs.begin(), accs.end(), 0.0) / accs.size();
      double var = 0.0;
      for (double a : accs) var += (a - mean) * (a - mean);
      row.mean_accuracy = mean;
      row.stddev_accuracy = accs.size() > 1 ? std::sqrt(var / (accs.size() - 1)) : 0.0;
      row.median_accuracy = accs[(accs.size() - 1) / 2];
      // hyperparameters of the median-accuracy run
      const double med = row.median_accuracy;
      for (auto* r : group)
        if (r->accuracy == med) {
          row.chosen = r->chosen;
          break;
        }
    }
    result.rows.push_back(row);
  }

  // runs.csv: one row per (cell, method, seed); wall-clock kept in the last column
  {
    std::ofstream out(fs::path(scenario.output_dir) / "runs.csv");
    if (!out) throw Error("run_scenario: cannot open runs.csv");
    out << "labeled_size,unlabeled_size,method,seed,accuracy,validation_accuracy,"
           "lr_exp,weight_decay_exp,lambda_exp,alpha_exp,gamma_exp,gamma_prime_exp,status,error,"
           "wall_clock_sec\n";
    for (const RunRow& r : runs) {
      std::string line = std::to_string(r.labeled_size) + "," + std::to_string(r.unlabeled_size) +
                         "," + r.method + "," + std::to_string(r.seed);
      append_csv_double(line, r.accuracy);
      append_csv_double(line, r.validation_score);
      line += "," + std::to_string(r.chosen.lr_exp) + "," + std::to_string(r.chosen.wd_exp) + "," +
              std::to_string(r.chosen.lambda_exp) + "," + std::to_string(r.chosen.alpha_exp) +
              "," + std::to_string(r.chosen.gamma_exp) + "," +
              std::to_string(r.chosen.gamma_prime_exp);
      line += std::string(",") + (r.ok ? "ok" : "failed") + "," + sanitize_error(r.error);
      append_csv_double(line, r.wall_clock_sec);
      out << line << "\n";
    }
  }

  // results.csv: aggregated per cell
  {
    std::ofstream out(fs::path(scenario.output_dir) / "results.csv");
    if (!out) throw Error("run_scenario: cannot open results.csv");
    out << "scenario_id,labeled_size,unlabeled_size,method,seeds,mean_accuracy,stddev_accuracy,"
           "median_accuracy,lr_exp,weight_decay_exp,lambda_exp,alpha_exp,gamma_exp,"
           "gamma_prime_exp,status\n";
    for (const ResultRow& r : result.rows) {
      std::string line = r.scenario_id + "," + std::to_string(r.labeled_size) + "," +
                         std::to_string(r.unlabeled_size) + "," + r.method + "," +
                         std::to_string(scenario.seeds.size());
      append_csv_double(line, r.mean_accuracy);
      append_csv_double(line, r.stddev_accuracy);
      append_csv_double(line, r.median_accuracy);
      line += "," + std::to_string(r.chosen.lr_exp) + "," + std::to_string(r.chosen.wd_exp) + "," +
              std::to_string(r.chosen.lambda_exp) + "," + std::to_string(r.chosen.alpha_exp) +
              "," + std::to_string(r.chosen.gamma_exp) + "," +
              std::to_string(r.chosen.gamma_prime_exp);
      line += std::string(",") + (r.ok ? "ok" : "failed");
      out << line << "\n";
    }
  }
  return result;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::pair<LabeledSet, UnlabeledSet> ingest_embeddings(const std::string& labeled_csv,
                                                      const std::string& unlabeled_csv,
                                                      const std::map<std::string, int>& schema) {
  std::ifstream in(labeled_csv);
  if (!in) throw Error("ingest_embeddings: cannot open " + labeled_csv);
  std::string line;
  if (!std::getline(in, line)) throw Error("ingest_embeddings: empty file " + labeled_csv);
  const auto header = split_fields(line);
  require(!header.empty() && header[0] == "label",
          "ingest_embeddings: labeled file must start with a 'label' column");
  const int d = static_cast<int>(header.size()) - 1;
  require(d >= 1, "ingest_embeddings: labeled file has no feature columns");

  std::vector<std::vector<double>> feats;
  std::vector<int> labels;
  int row = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != d + 1)
      throw Error("ingest_embeddings: row " + std::to_string(row) + " of " + labeled_csv +
                  " has " + std::to_string(fields.size()) + " fields, expected " +
                  std::to_string(d + 1));
    int y = 0;
    const auto it = schema.find(fields[0]);
    if (it != schema.end()) {
      y = it->second;
    } else {
      try {
        std::size_t pos = 0;
        const double v = std::stod(fields[0], &pos);
        if (pos != fields[0].size() || (v != 1.0 && v != -1.0)) throw std::invalid_argument("");
        y = static_cast<int>(v);
      } catch (const std::exception&) {
        throw Error("ingest_embeddings: unknown label '" + fields[0] + "' at row " +
                    std::to_string(row));
      }
    }
    require(y == 1 || y == -1, "ingest_embeddings: schema must map labels to +-1 (row " +
                                   std::to_string(row) + ")");
    labels.push_back(y);
    std::vector<double> vals(d);
    for (int j = 0; j < d; ++j) {
      try {
        vals[j] = std::stod(fields[j + 1]);
      } catch (const std::exception&) {
        throw Error("ingest_embeddings: bad numeric value at row " + std::to_string(row) +
                    ", column " + std::to_string(j + 1));
      }
    }
    feats.push_back(std::move(vals));
  }

  LabeledSet lab;
  lab.features.resize(static_cast<int>(feats.size()), d);
  lab.labels.resize(static_cast<int>(feats.size()));
  for (std::size_t i = 0; i < feats.size(); ++i) {
    lab.labels[static_cast<int>(i)] = labels[i];
    for (int j = 0; j < d; ++j) lab.features(static_cast<int>(i), j) = feats[i][j];
  }
  lab.validate();

  UnlabeledSet unl = read_unlabeled_csv(unlabeled_csv);
  if (unl.d() != d) {
    throw Error("ingest_embeddings: dimension mismatch: labeled d=" + std::to_string(d) +
                ", unlabeled d=" + std::to_string(unl.d()));
  }
  return {lab, unl};
}

void emit_bound_sweep(const BoundSweep& sweep, const std::string& out_path) {
  require(sweep.bound_id >= 1 && sweep.bound_id <= 3, "emit_bound_sweep: bound id must be 1, 2, or 3");
  require(!sweep.m_values.empty() && !sweep.n_values.empty() && !sweep.d_values.empty(),
          "emit_bound_sweep: m, n, d grids must be nonempty");
  require(!sweep.alpha_values.empty(), "emit_bound_sweep: alpha grid must be nonempty");

  std::vector<std::string> breakdown_names;
  std::vector<std::string> lines;
  for (int d : sweep.d_values) {
    // deterministic spec of dimension d
    Rng rng(0x626e64ULL + d);
    const Vector mu0 = sweep.mu0_norm * rng.unit_vector(d);
    Matrix cov;
    if (sweep.bound_id == 3) {
      std::vector<double> eigs = sweep.general_eigenvalues;
      if (static_cast<int>(eigs.size()) != d) {
        eigs.resize(d);
        for (int i = 0; i < d; ++i) eigs[i] = 1.0 + i;  // distinct spectrum by default
      }
      cov = spd_from_eigenvalues(eigs, 0x636f76ULL + d);
    }
    for (int m : sweep.m_values)
      for (int n : sweep.n_values)
        for (double alpha : sweep.alpha_values) {
          BoundReport rep;
          if (sweep.bound_id == 1) {
            rep = robust_excess_residual(BoundInputs::isotropic(m, n, d, alpha, sweep.delta, sweep.gamma,
                                                       mu0, sweep.sigma0, mu0, sweep.sigma1));
          } else if (sweep.bound_id == 2) {
            rep = nonrobust_excess_residual(BoundInputs::isotropic(m, n, d, alpha, sweep.delta, sweep.gamma,
                                                       mu0, sweep.sigma0, mu0, sweep.sigma1));
          } else {
            rep = general_excess_residual(BoundInputs::general(m, n, d, alpha, sweep.delta, sweep.gamma,
                                                     mu0, cov, mu0, cov, sweep.beta));
          }
          if (breakdown_names.empty())
            for (const auto& [k, v] : rep.breakdown) breakdown_names.push_back(k);
          char buf[64];
          std::string line = std::to_string(sweep.bound_id) + "," + std::to_string(m) + "," +
                             std::to_string(n) + "," + std::to_string(d);
          std::snprintf(buf, sizeof(buf), ",%.10g,%.10g,%.10g", alpha, sweep.delta, sweep.gamma);
          line += buf;
          std::snprintf(buf, sizeof(buf), ",%.17g", rep.residual);
          line += buf;
          for (const auto& [k, v] : rep.breakdown) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v);
            line += buf;
          }
          lines.push_back(line);
        }
  }

  std::ofstream out(out_path);
  if (!out) throw Error("emit_bound_sweep: cannot open " + out_path);
  std::string header = "bound,m,n,d,alpha,delta,gamma,residual";
  for (const auto& name : breakdown_names) header += "," + name;
  out << header << "\n";
  for (const auto& line : lines) out << line << "\n";
}

}  // namespace rss
