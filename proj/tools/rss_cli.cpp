// Command-line front end: seeded simulated-data scenarios, single training
// runs, hyperparameter search, bound sweeps, and embedding ingestion.
#include "rss/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>

namespace fs = std::filesystem;
using namespace rss;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("RSS_OUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("out");
}

std::vector<std::uint64_t> parse_u64_list(const std::string& csv) {
  std::vector<std::uint64_t> vals;
  std::string cur;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!cur.empty()) vals.push_back(std::stoull(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return vals;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> vals;
  std::string cur;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!cur.empty()) vals.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return vals;
}

std::map<std::string, int> parse_schema(const std::string& text) {
  // "tumor=1,normal=-1"
  std::map<std::string, int> schema;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      if (!cur.empty()) {
        const auto eq = cur.find('=');
        if (eq == std::string::npos) throw Error("schema entries must look like name=+-1");
        schema[cur.substr(0, eq)] = std::stoi(cur.substr(eq + 1));
      }
      cur.clear();
    } else {
      cur += c;
    }
  }
  return schema;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir_override,
                 const std::string& seeds_override, int trials_override, bool emit_data_only) {
  Scenario sc = Scenario::from_json_file(config_path);
  if (!out_dir_override.empty()) sc.output_dir = out_dir_override;
  if (!seeds_override.empty()) sc.seeds = parse_u64_list(seeds_override);
  if (trials_override > 0) sc.search_trials = trials_override;
  sc.validate();

  if (emit_data_only) {
    require(sc.mode != Scenario::Mode::Embeddings,
            "simulate --emit-data-only applies to simulated modes");
    fs::create_directories(sc.output_dir);
    Rng dir(mix_seed(sc.spec_seed, 0x737065ULL));
    const Vector mu0 = sc.mu0_norm * dir.unit_vector(sc.d);
    GmmSpec spec = sc.mode == Scenario::Mode::SimulatedGeneral
                       ? GmmSpec::general(mu0, spd_from_eigenvalues(sc.general_eigenvalues,
                                                                    mix_seed(sc.spec_seed, 2)))
                       : GmmSpec::isotropic(mu0, sc.sigma0);
    if (sc.alpha > 0.0) spec = make_shifted_spec(spec, sc.alpha, mix_seed(sc.spec_seed, 3));
    const int m = *std::max_element(sc.labeled_sizes.begin(), sc.labeled_sizes.end());
    const int n = *std::max_element(sc.unlabeled_sizes.begin(), sc.unlabeled_sizes.end());
    const std::uint64_t seed = sc.seeds.front();
    write_labeled_csv(sample_labeled(spec, m, mix_seed(seed, 1)),
                      (fs::path(sc.output_dir) / "labeled.csv").string());
    write_unlabeled_csv(sample_unlabeled(spec, n, mix_seed(seed, 2)),
                        (fs::path(sc.output_dir) / "unlabeled.csv").string());
    write_labeled_csv(sample_labeled_balanced(spec, sc.test_size, mix_seed(seed, 3)),
                      (fs::path(sc.output_dir) / "test.csv").string());
    std::printf("wrote labeled.csv (m=%d), unlabeled.csv (n=%d), test.csv (%d) under %s\n", m, n,
                sc.test_size, sc.output_dir.c_str());
    return 0;
  }

  const ScenarioResult result = run_scenario(sc);
  std::printf("%-10s %8s %10s %8s %8s %8s\n", "method", "labeled", "unlabeled", "mean", "stddev",
              "median");
  for (const ResultRow& row : result.rows) {
    std::printf("%-10s %8d %10d %8.4f %8.4f %8.4f%s\n", row.method.c_str(), row.labeled_size,
                row.unlabeled_size, row.mean_accuracy, row.stddev_accuracy, row.median_accuracy,
                row.ok ? "" : "  [FAILED]");
  }
  std::printf("results under %s\n", sc.output_dir.c_str());
  return result.all_ok ? 0 : 1;
}

int cmd_train(const std::string& config_path, const std::string& labeled_path,
              const std::string& unlabeled_path, const std::string& test_path,
              const std::string& method, const std::string& out_stem) {
  TrainConfig cfg = read_train_config_json(config_path);
  const LabeledSet labeled = read_labeled_csv(labeled_path);
  LabeledSet test;
  const bool has_test = !test_path.empty();
  if (has_test) test = read_labeled_csv(test_path);

  TrainReport report;
  if (method == "erm") {
    report = train_erm(labeled, cfg, has_test ? &test : nullptr);
  } else {
    UnlabeledSet unlabeled;
    if (!unlabeled_path.empty()) {
      unlabeled = read_unlabeled_csv(unlabeled_path);
    } else {
      unlabeled.features.resize(0, labeled.d());
    }
    report = train_rss(labeled, unlabeled, cfg, has_test ? &test : nullptr);
  }

  const fs::path parent = fs::path(out_stem).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  write_train_report(report, out_stem + ".json", out_stem + ".epochs.csv");
  save_model(report.model, out_stem + ".model.csv");
  std::printf("final objective %.6f", report.total_obj.back());
  if (has_test) std::printf(", test accuracy %.4f", report.test_accuracy);
  std::printf("\nreport: %s.json\n", out_stem.c_str());
  return 0;
}

int cmd_search(const std::string& labeled_path, const std::string& unlabeled_path, int trials,
               std::uint64_t seed, int epochs, int inner_steps, const std::string& model,
               const std::string& out_path) {
  Scenario knobs;
  knobs.search_trials = trials;
  knobs.search_epochs = epochs;
  knobs.inner_steps = inner_steps;
  knobs.model_kind = model == "mlp" ? ModelSpec::Kind::Mlp : ModelSpec::Kind::Linear;

  const LabeledSet labeled = read_labeled_csv(labeled_path);
  UnlabeledSet unlabeled;
  bool rss = false;
  if (!unlabeled_path.empty()) {
    unlabeled = read_unlabeled_csv(unlabeled_path);
    rss = true;
  } else {
    unlabeled.features.resize(0, labeled.d());
  }

  const SearchResult result = search_hyperparams(knobs, labeled, unlabeled, rss, seed);
  write_trial_log_csv(result, out_path);
  std::printf("best trial #%d: validation accuracy %.4f\n", result.best_index, result.best_score);
  std::printf("lr=1e%d wd=1e%d lambda=1e%d alpha=1e%d gamma=1e%d gamma'=1e%d\n",
              result.best.lr_exp, result.best.wd_exp, result.best.lambda_exp,
              result.best.alpha_exp, result.best.gamma_exp, result.best.gamma_prime_exp);
  std::printf("trial log: %s\n", out_path.c_str());
  return 0;
}

int cmd_bounds(int bound_id, const std::string& m_csv, const std::string& n_csv,
               const std::string& d_csv, const std::string& alpha_csv, double delta, double gamma,
               double mu0_norm, double sigma0, double sigma1, const std::string& eigs_csv,
               double beta, const std::string& out_path) {
  BoundSweep sweep;
  sweep.bound_id = bound_id;
  for (auto v : parse_u64_list(m_csv)) sweep.m_values.push_back(int(v));
  for (auto v : parse_u64_list(n_csv)) sweep.n_values.push_back(int(v));
  for (auto v : parse_u64_list(d_csv)) sweep.d_values.push_back(int(v));
  sweep.alpha_values = parse_double_list(alpha_csv);
  sweep.delta = delta;
  sweep.gamma = gamma;
  sweep.mu0_norm = mu0_norm;
  sweep.sigma0 = sigma0;
  sweep.sigma1 = sigma1;
  sweep.beta = beta;
  sweep.general_eigenvalues = eigs_csv.empty() ? std::vector<double>{} : parse_double_list(eigs_csv);
  emit_bound_sweep(sweep, out_path);
  std::printf("bound sweep written to %s\n", out_path.c_str());
  return 0;
}

int cmd_ingest(const std::string& labeled_path, const std::string& unlabeled_path,
               const std::string& schema_text, const std::string& out_labeled,
               const std::string& out_unlabeled) {
  const auto schema = parse_schema(schema_text);
  const auto [labeled, unlabeled] = ingest_embeddings(labeled_path, unlabeled_path, schema);
  int pos = 0;
  for (int i = 0; i < labeled.m(); ++i) pos += labeled.labels[i] == 1;
  std::printf("labeled: %d rows (%d positive), unlabeled: %d rows, d=%d\n", labeled.m(), pos,
              unlabeled.n(), labeled.d());
  if (!out_labeled.empty()) write_labeled_csv(labeled, out_labeled);
  if (!out_unlabeled.empty()) write_unlabeled_csv(unlabeled, out_unlabeled);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust self-supervised training bench"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run a simulated-data scenario end to end");
  std::string sim_config, sim_out, sim_seeds;
  int sim_trials = 0;
  bool sim_data_only = false;
  sim->add_option("--config", sim_config, "scenario JSON")->required();
  sim->add_option("--out-dir", sim_out, "output directory override");
  sim->add_option("--seeds", sim_seeds, "comma-separated seed list override");
  sim->add_option("--trials", sim_trials, "search trial count override");
  sim->add_flag("--emit-data-only", sim_data_only, "write the datasets and stop");

  auto* tr = app.add_subcommand("train", "one training run from a config");
  std::string tr_config, tr_labeled, tr_unlabeled, tr_test, tr_method = "rss";
  std::string tr_out = default_out_dir() + "/train_run";
  tr->add_option("--config", tr_config, "train config JSON")->required();
  tr->add_option("--labeled", tr_labeled, "labeled CSV")->required();
  tr->add_option("--unlabeled", tr_unlabeled, "unlabeled CSV");
  tr->add_option("--test", tr_test, "test CSV");
  tr->add_option("--method", tr_method, "erm|rss")->check(CLI::IsMember({"erm", "rss"}));
  tr->add_option("--out", tr_out, "output stem");

  auto* se = app.add_subcommand("search", "random hyperparameter search");
  std::string se_labeled, se_unlabeled, se_model = "linear";
  std::string se_out = default_out_dir() + "/trials.csv";
  int se_trials = 50, se_epochs = 40, se_inner = 0;
  std::uint64_t se_seed = 0;
  se->add_option("--labeled", se_labeled, "labeled CSV")->required();
  se->add_option("--unlabeled", se_unlabeled, "unlabeled CSV");
  se->add_option("--trials", se_trials, "trial count");
  se->add_option("--seed", se_seed, "search seed");
  se->add_option("--epochs", se_epochs, "epochs per validation fold");
  se->add_option("--inner-steps", se_inner, "adversarial ascent steps (0 = closed forms)");
  se->add_option("--model", se_model, "linear|mlp")->check(CLI::IsMember({"linear", "mlp"}));
  se->add_option("--out", se_out, "trial log CSV path");

  auto* bo = app.add_subcommand("bounds", "evaluate bound residuals over a grid");
  int bo_bound = 1;
  std::string bo_m = "100", bo_n = "10000", bo_d = "200", bo_alpha = "0", bo_eigs;
  double bo_delta = 0.05, bo_gamma = 1.0, bo_mu0 = 1.0, bo_s0 = 1.0, bo_s1 = 1.0, bo_beta = 1.0;
  std::string bo_out = default_out_dir() + "/bounds.csv";
  bo->add_option("--bound", bo_bound, "bound evaluator: 1 robust excess, 2 non-robust isotropic, 3 general covariance")->check(CLI::Range(1, 3));
  bo->add_option("--m", bo_m, "labeled sizes, comma-separated");
  bo->add_option("--n", bo_n, "unlabeled sizes");
  bo->add_option("--d", bo_d, "dimensions");
  bo->add_option("--alpha", bo_alpha, "shift magnitudes");
  bo->add_option("--delta", bo_delta, "confidence level");
  bo->add_option("--gamma", bo_gamma, "labeled dual parameter");
  bo->add_option("--mu0-norm", bo_mu0, "||mu0||");
  bo->add_option("--sigma0", bo_s0, "sigma0");
  bo->add_option("--sigma1", bo_s1, "sigma1");
  bo->add_option("--eigs", bo_eigs, "covariance eigenvalues (general bound)");
  bo->add_option("--beta", bo_beta, "||mu1|| >= beta lambda_max constant (general bound)");
  bo->add_option("--out", bo_out, "output CSV");

  auto* in = app.add_subcommand("ingest", "validate and convert embedding CSVs");
  std::string in_labeled, in_unlabeled, in_schema, in_out_l, in_out_u;
  in->add_option("--labeled", in_labeled, "labeled embeddings CSV")->required();
  in->add_option("--unlabeled", in_unlabeled, "unlabeled embeddings CSV")->required();
  in->add_option("--schema", in_schema, "class map, e.g. tumor=1,normal=-1");
  in->add_option("--out-labeled", in_out_l, "re-export labeled CSV here");
  in->add_option("--out-unlabeled", in_out_u, "re-export unlabeled CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(sim_config, sim_out, sim_seeds, sim_trials, sim_data_only);
    if (tr->parsed())
      return cmd_train(tr_config, tr_labeled, tr_unlabeled, tr_test, tr_method, tr_out);
    if (se->parsed())
      return cmd_search(se_labeled, se_unlabeled, se_trials, se_seed, se_epochs, se_inner,
                        se_model, se_out);
    if (bo->parsed())
      return cmd_bounds(bo_bound, bo_m, bo_n, bo_d, bo_alpha, bo_delta, bo_gamma, bo_mu0, bo_s0,
                        bo_s1, bo_eigs, bo_beta, bo_out);
    if (in->parsed()) return cmd_ingest(in_labeled, in_unlabeled, in_schema, in_out_l, in_out_u);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
