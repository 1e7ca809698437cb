#include "rss/rss_trainer.hpp"

#include "rss/inner_solver.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <numeric>

namespace rss {

using json = nlohmann::json;

namespace {

bool unit_norm(const LinearParams& p) { return std::abs(p.w.norm() - 1.0) <= 1e-9; }

LossSpec labeled_loss_spec(const ModelSpec& model, const RobustConfig& robust) {
  if (model.kind == ModelSpec::Kind::Linear)
    return LossSpec{LossKind::Hinge01Surrogate, robust.gamma};
  return LossSpec{LossKind::CrossEntropy, 1.0};
}

LossSpec unlabeled_loss_spec(const ModelSpec& model, const RobustConfig& robust) {
  if (model.kind == ModelSpec::Kind::Linear)
    return LossSpec{LossKind::SquaredMargin, robust.gamma_prime};
  return LossSpec{LossKind::CrossEntropy, 1.0};
}

bool perturbation_enabled(const InnerSolverConfig& inner) {
  return inner.steps >= 1 && inner.alpha > 0.0;
}

// phi at a single point: adversarial sup when the inner solver is enabled,
// otherwise the surrogate at the unperturbed input (exact for the closed
// forms; see module notes).
double phi_point(const Model& model, const LossSpec& loss, const Vector& x, int y, double gamma,
                 CostKind cost, const InnerSolverConfig& inner) {
  if (!perturbation_enabled(inner)) {
    return model.is_linear() ? loss_and_grad(model.linear(), x, y, loss).value
                             : loss_and_grad(model.mlp(), x, y, loss).value;
  }
  return phi_numeric(point_loss(model, loss, y), x, gamma, cost, inner).value;
}

// Momentum-free optimizer: plain descent steps, optionally rescaled per
// parameter by a running second-moment accumulator.
struct AdaptiveScale {
  double beta2 = 0.999, eps = 1e-8;
  long t = 0;

  void step_begin() { ++t; }

  template <class Arr>
  void apply(Arr& param, const Arr& grad, Arr& moment, double lr, bool adaptive) const {
    if (!adaptive) {
      param -= lr * grad;
      return;
    }
    moment = beta2 * moment + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double corr = 1.0 - std::pow(beta2, double(t));
    param -= lr * grad.cwiseQuotient(((moment / corr).cwiseSqrt().array() + eps).matrix());
  }
};

struct LinearState {
  LinearParams params;
  Vector moment;
  double bias_moment = 0.0;
};

struct MlpState {
  MlpParams params;
  std::vector<Matrix> w_moment;
  std::vector<Vector> b_moment;
};

Vector class_mean_direction(const LabeledSet& labeled) {
  Vector v = Vector::Zero(labeled.d());
  for (int i = 0; i < labeled.m(); ++i)
    v += double(labeled.labels[i]) * labeled.features.row(i).transpose();
  return v;
}

std::vector<std::pair<int, int>> batch_ranges(int count, int k) {
  // k batches of size ceil(count/k); fewer when count < k
  std::vector<std::pair<int, int>> out;
  if (count <= 0) return out;
  const int bs = (count + k - 1) / k;
  for (int start = 0; start < count; start += bs) out.push_back({start, std::min(start + bs, count)});
  return out;
}

}  // namespace

RssObjective rss_objective(const Model& model, const LabeledSet& labeled,
                           const UnlabeledSet& unlabeled, const RobustConfig& cfg) {
  cfg.validate();
  labeled.validate();
  unlabeled.validate();
  require(labeled.m() >= 1, "rss_objective: labeled set must be nonempty");
  if (unlabeled.n() == 0)
    require(cfg.lambda == 0.0, "rss_objective: empty unlabeled set requires lambda = 0");

  const bool closed = model.is_linear() && unit_norm(model.linear());
  RssObjective obj;

  const LossSpec lspec = model.is_linear()
                             ? LossSpec{LossKind::Hinge01Surrogate, cfg.gamma}
                             : LossSpec{LossKind::CrossEntropy, 1.0};
  const LossSpec uspec = model.is_linear()
                             ? LossSpec{LossKind::SquaredMargin, cfg.gamma_prime}
                             : LossSpec{LossKind::CrossEntropy, 1.0};

  double lsum = 0.0;
  for (int i = 0; i < labeled.m(); ++i) {
    const Vector x = labeled.features.row(i).transpose();
    lsum += closed ? phi_labeled_closed(model.linear().w, x, labeled.labels[i], cfg.gamma)
                   : phi_point(model, lspec, x, labeled.labels[i], cfg.gamma, cfg.labeled_cost,
                               cfg.inner);
  }
  obj.labeled = lsum / labeled.m();

  if (cfg.lambda > 0.0 && unlabeled.n() > 0) {
    double usum = 0.0;
    for (int j = 0; j < unlabeled.n(); ++j) {
      const Vector x = unlabeled.features.row(j).transpose();
      const int h = model.predict(x);  // self-label from the current model
      usum += closed ? phi_unlabeled_closed(model.linear().w, x, cfg.gamma_prime)
                     : phi_point(model, uspec, x, h, cfg.gamma_prime, cfg.unlabeled_cost,
                                 cfg.inner);
    }
    obj.unlabeled = cfg.lambda * usum / unlabeled.n();
  }
  obj.total = obj.labeled + obj.unlabeled;
  return obj;
}

namespace {

struct EpochAccum {
  double labeled_sum = 0.0;
  long labeled_count = 0;
  double unlabeled_sum = 0.0;
  long unlabeled_count = 0;
};

// One paired mini-batch step on a linear model. Returns the batch objective.
double linear_batch_step(LinearState& st, AdaptiveScale& opt, const TrainConfig& cfg,
                         const LabeledSet& labeled, const std::vector<int>& lidx, int l_lo,
                         int l_hi, const UnlabeledSet& unlabeled, const std::vector<int>& uidx,
                         int u_lo, int u_hi, EpochAccum* acc) {
  const RobustConfig& rb = cfg.robust;
  const bool perturb = perturbation_enabled(rb.inner);
  const LossSpec lspec = labeled_loss_spec(cfg.model, rb);
  const LossSpec uspec = unlabeled_loss_spec(cfg.model, rb);
  const int d = labeled.d();

  Vector gw = Vector::Zero(d);
  double gb = 0.0;
  double labeled_mean = 0.0, unlabeled_mean = 0.0;

  const int lcnt = l_hi - l_lo;
  if (lcnt > 0) {
    double sum = 0.0;
    if (!perturb) {
      // allocation-free hot path on the closed-form surrogates
      for (int ii = l_lo; ii < l_hi; ++ii) {
        const int i = lidx[ii];
        const auto row = labeled.features.row(i);
        const double f = row.dot(st.params.w) + (st.params.use_bias ? st.params.bias : 0.0);
        double val = 0.0, dfdv = 0.0;
        margin_loss_scalar(lspec, f, labeled.labels[i], &val, &dfdv);
        sum += val;
        if (dfdv != 0.0) {
          gw.noalias() += dfdv * row.transpose();
          gb += st.params.use_bias ? dfdv : 0.0;
        }
      }
    } else {
      for (int ii = l_lo; ii < l_hi; ++ii) {
        const int i = lidx[ii];
        const Vector x = labeled.features.row(i).transpose();
        const int y = labeled.labels[i];
        const auto pr = adversarial_perturb(point_loss(st.params, lspec, y), x, rb.gamma,
                                            rb.labeled_cost, rb.inner);
        const auto lg = loss_and_grad(st.params, pr.z_best, y, lspec);
        sum += lg.value - rb.gamma * cost_value(rb.labeled_cost, pr.z_best, x);
        gw.noalias() += lg.w_grad;  // envelope theorem: z held fixed
        gb += lg.bias_grad;
      }
    }
    gw /= lcnt;
    gb /= lcnt;
    labeled_mean = sum / lcnt;
    acc->labeled_sum += sum;
    acc->labeled_count += lcnt;
  }

  const int ucnt = u_hi - u_lo;
  if (ucnt > 0 && rb.lambda > 0.0) {
    Vector guw = Vector::Zero(d);
    double gub = 0.0;
    double sum = 0.0;
    if (!perturb) {
      // SquaredMargin(gamma') ignores the sign of the self-label, so the
      // frozen h_theta(x') never needs to be materialized here.
      for (int jj = u_lo; jj < u_hi; ++jj) {
        const auto row = unlabeled.features.row(uidx[jj]);
        const double f = row.dot(st.params.w) + (st.params.use_bias ? st.params.bias : 0.0);
        double val = 0.0, dfdv = 0.0;
        margin_loss_scalar(uspec, f, +1, &val, &dfdv);
        sum += val;
        if (dfdv != 0.0) {
          guw.noalias() += dfdv * row.transpose();
          gub += st.params.use_bias ? dfdv : 0.0;
        }
      }
    } else {
      for (int jj = u_lo; jj < u_hi; ++jj) {
        const int j = uidx[jj];
        const Vector x = unlabeled.features.row(j).transpose();
        const int h = st.params.predict(x);  // freeze the self-label before perturbing
        const auto pr = adversarial_perturb(point_loss(st.params, uspec, h), x, rb.gamma_prime,
                                            rb.unlabeled_cost, rb.inner);
        const auto lg = loss_and_grad(st.params, pr.z_best, h, uspec);
        sum += lg.value - rb.gamma_prime * cost_value(rb.unlabeled_cost, pr.z_best, x);
        guw.noalias() += lg.w_grad;
        gub += lg.bias_grad;
      }
    }
    gw.noalias() += (rb.lambda / ucnt) * guw;
    gb += rb.lambda / ucnt * gub;
    unlabeled_mean = rb.lambda * sum / ucnt;
    acc->unlabeled_sum += sum;
    acc->unlabeled_count += ucnt;
  }

  if (cfg.weight_decay > 0.0) gw.noalias() += cfg.weight_decay * st.params.w;

  opt.step_begin();
  opt.apply(st.params.w, gw, st.moment, cfg.learning_rate, cfg.adaptive);
  if (st.params.use_bias) {
    // scalar path of the same rule
    if (cfg.adaptive) {
      st.bias_moment = opt.beta2 * st.bias_moment + (1.0 - opt.beta2) * gb * gb;
      const double corr = 1.0 - std::pow(opt.beta2, double(opt.t));
      st.params.bias -= cfg.learning_rate * gb / (std::sqrt(st.bias_moment / corr) + opt.eps);
    } else {
      st.params.bias -= cfg.learning_rate * gb;
    }
  }
  st.params.project();
  return labeled_mean + unlabeled_mean;
}

double mlp_batch_step(MlpState& st, AdaptiveScale& opt, const TrainConfig& cfg,
                      const LabeledSet& labeled, const std::vector<int>& lidx, int l_lo, int l_hi,
                      const UnlabeledSet& unlabeled, const std::vector<int>& uidx, int u_lo,
                      int u_hi, EpochAccum* acc) {
  const RobustConfig& rb = cfg.robust;
  const bool perturb = perturbation_enabled(rb.inner);
  const LossSpec lspec = labeled_loss_spec(cfg.model, rb);
  const LossSpec uspec = unlabeled_loss_spec(cfg.model, rb);

  std::vector<Matrix> gw;
  std::vector<Vector> gb;
  for (std::size_t l = 0; l < st.params.weights.size(); ++l) {
    gw.push_back(Matrix::Zero(st.params.weights[l].rows(), st.params.weights[l].cols()));
    gb.push_back(Vector::Zero(st.params.biases[l].size()));
  }

  auto add_sample = [&](const Vector& x, int y, const LossSpec& spec, double gamma,
                        CostKind cost, double weight) {
    Vector z = x;
    double transport = 0.0;
    if (perturb) {
      const auto pr = adversarial_perturb(point_loss(st.params, spec, y), x, gamma, cost,
                                          rb.inner);
      z = pr.z_best;
      transport = gamma * cost_value(cost, z, x);
    }
    const auto lg = loss_and_grad(st.params, z, y, spec);
    for (std::size_t l = 0; l < gw.size(); ++l) {
      gw[l].noalias() += weight * lg.w_grad[l];
      gb[l].noalias() += weight * lg.b_grad[l];
    }
    return lg.value - transport;
  };

  double labeled_mean = 0.0, unlabeled_mean = 0.0;
  const int lcnt = l_hi - l_lo;
  if (lcnt > 0) {
    double sum = 0.0;
    for (int ii = l_lo; ii < l_hi; ++ii) {
      const int i = lidx[ii];
      sum += add_sample(labeled.features.row(i).transpose(), labeled.labels[i], lspec, rb.gamma,
                        rb.labeled_cost, 1.0 / lcnt);
    }
    labeled_mean = sum / lcnt;
    acc->labeled_sum += sum;
    acc->labeled_count += lcnt;
  }
  const int ucnt = u_hi - u_lo;
  if (ucnt > 0 && rb.lambda > 0.0) {
    double sum = 0.0;
    for (int jj = u_lo; jj < u_hi; ++jj) {
      const int j = uidx[jj];
      const Vector x = unlabeled.features.row(j).transpose();
      const int h = st.params.predict(x);
      sum += add_sample(x, h, uspec, rb.gamma_prime, rb.unlabeled_cost, rb.lambda / ucnt);
    }
    unlabeled_mean = rb.lambda * sum / ucnt;
    acc->unlabeled_sum += sum;
    acc->unlabeled_count += ucnt;
  }

  opt.step_begin();
  for (std::size_t l = 0; l < gw.size(); ++l) {
    if (cfg.weight_decay > 0.0) gw[l].noalias() += cfg.weight_decay * st.params.weights[l];
    opt.apply(st.params.weights[l], gw[l], st.w_moment[l], cfg.learning_rate, cfg.adaptive);
    opt.apply(st.params.biases[l], gb[l], st.b_moment[l], cfg.learning_rate, cfg.adaptive);
  }
  return labeled_mean + unlabeled_mean;
}

}  // namespace

TrainReport train_rss(const LabeledSet& labeled, const UnlabeledSet& unlabeled,
                      const TrainConfig& cfg, const LabeledSet* test) {
  cfg.validate();
  labeled.validate();
  unlabeled.validate();
  require(labeled.m() >= 1, "train_rss: labeled set must be nonempty");
  if (cfg.robust.lambda > 0.0)
    require(unlabeled.n() >= 1, "train_rss: lambda > 0 needs unlabeled data");
  if (unlabeled.n() > 0)
    require(unlabeled.d() == labeled.d(), "train_rss: labeled/unlabeled dimension mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  // independent streams so the labeled batch order (and the model init) do
  // not depend on whether unlabeled data is present
  Rng rng_init(mix_seed(cfg.seed, 0x696e6974ULL));
  Rng rng_labeled(mix_seed(cfg.seed, 0x6c626174ULL));
  Rng rng_unlabeled(mix_seed(cfg.seed, 0x75626174ULL));

  TrainReport report;
  AdaptiveScale opt;

  LinearState lin;
  MlpState mlp;
  const bool is_linear = cfg.model.kind == ModelSpec::Kind::Linear;
  if (is_linear) {
    lin.params.normalize = cfg.model.normalize;
    lin.params.use_bias = cfg.model.use_bias;
    // Warm start from the class-mean direction; it is the natural labeled-only
    // guess and pins the sign of the solution the unlabeled term converges to.
    Vector v = class_mean_direction(labeled);
    lin.params.w = v.norm() > 0.0 ? Vector(v / v.norm()) : rng_init.unit_vector(labeled.d());
    lin.moment = Vector::Zero(labeled.d());
  } else {
    std::vector<int> sizes;
    sizes.push_back(labeled.d());
    for (int h : cfg.model.hidden) sizes.push_back(h);
    sizes.push_back(cfg.model.outputs);
    mlp.params = MlpParams::init(sizes, rng_init, cfg.model.leaky_slope);
    for (std::size_t l = 0; l < mlp.params.weights.size(); ++l) {
      mlp.w_moment.push_back(Matrix::Zero(mlp.params.weights[l].rows(), mlp.params.weights[l].cols()));
      mlp.b_moment.push_back(Vector::Zero(mlp.params.biases[l].size()));
    }
  }

  std::vector<int> lidx(labeled.m());
  std::iota(lidx.begin(), lidx.end(), 0);
  std::vector<int> uidx(unlabeled.n());
  std::iota(uidx.begin(), uidx.end(), 0);
  const bool use_unlabeled = cfg.robust.lambda > 0.0 && unlabeled.n() > 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng_labeled.shuffle(lidx);
    if (unlabeled.n() > 0) rng_unlabeled.shuffle(uidx);
    const auto lb = batch_ranges(labeled.m(), cfg.batch_split);
    const auto ub = use_unlabeled ? batch_ranges(unlabeled.n(), cfg.batch_split)
                                  : std::vector<std::pair<int, int>>{};
    const int steps = static_cast<int>(std::max(lb.size(), std::max<std::size_t>(ub.size(), 1)));

    EpochAccum acc;
    for (int s = 0; s < steps; ++s) {
      const auto& lr = lb[s % lb.size()];  // cycle the shorter loader
      std::pair<int, int> ur{0, 0};
      if (!ub.empty()) ur = ub[s % ub.size()];
      double batch_obj;
      try {
        batch_obj = is_linear
                        ? linear_batch_step(lin, opt, cfg, labeled, lidx, lr.first, lr.second,
                                            unlabeled, uidx, ur.first, ur.second, &acc)
                        : mlp_batch_step(mlp, opt, cfg, labeled, lidx, lr.first, lr.second,
                                         unlabeled, uidx, ur.first, ur.second, &acc);
      } catch (const Error& e) {
        throw Error("train_rss: aborted at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(s) + ": " + e.what());
      }
      if (!std::isfinite(batch_obj)) {
        throw Error("train_rss: objective diverged (NaN/inf) at epoch " + std::to_string(epoch) +
                    ", batch " + std::to_string(s));
      }
    }
    const double lterm = acc.labeled_count > 0 ? acc.labeled_sum / acc.labeled_count : 0.0;
    const double uterm = acc.unlabeled_count > 0
                             ? cfg.robust.lambda * acc.unlabeled_sum / acc.unlabeled_count
                             : 0.0;
    report.labeled_obj.push_back(lterm);
    report.unlabeled_obj.push_back(uterm);
    report.total_obj.push_back(lterm + uterm);
  }

  if (is_linear)
    report.model.value = lin.params;
  else
    report.model.value = mlp.params;
  if (test != nullptr) report.test_accuracy = accuracy(report.model, *test);
  report.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

TrainReport train_erm(const LabeledSet& labeled, const TrainConfig& cfg, const LabeledSet* test) {
  TrainConfig erm = cfg;
  erm.robust.lambda = 0.0;
  erm.robust.inner.steps = 0;  // plain-loss path, no adversary
  UnlabeledSet empty;
  empty.features.resize(0, labeled.d());
  return train_rss(labeled, empty, erm, test);
}

bool constrained_view_check(const LinearParams& model, const UnlabeledSet& unlabeled,
                            double gamma_prime, double s) {
  require(s >= 0.0, "constrained_view_check: s must be >= 0");
  require(unlabeled.n() >= 1, "constrained_view_check: empty unlabeled set");
  double sum = 0.0;
  for (int j = 0; j < unlabeled.n(); ++j)
    sum += phi_unlabeled_closed(model.w, unlabeled.features.row(j).transpose(), gamma_prime);
  return sum / unlabeled.n() <= s;
}

double accuracy(const Model& model, const LabeledSet& set) {
  require(set.m() >= 1, "accuracy: empty evaluation set");
  int correct = 0;
  for (int i = 0; i < set.m(); ++i)
    if (model.predict(set.features.row(i).transpose()) == set.labels[i]) ++correct;
  return double(correct) / set.m();
}

namespace {

json inner_to_json(const InnerSolverConfig& inner) {
  return json{{"steps", inner.steps},
              {"alpha", inner.alpha},
              {"decay", inner.decay == StepDecay::DivideByStep ? "divide_by_step" : "constant"},
              {"radius_cap", inner.radius_cap}};
}

InnerSolverConfig inner_from_json(const json& j) {
  InnerSolverConfig inner;
  inner.steps = j.at("steps");
  inner.alpha = j.at("alpha");
  inner.decay = j.at("decay") == "constant" ? StepDecay::Constant : StepDecay::DivideByStep;
  inner.radius_cap = j.at("radius_cap");
  return inner;
}

}  // namespace

void write_train_config_json(const TrainConfig& cfg, const std::string& path) {
  json j{{"epochs", cfg.epochs},
         {"batch_split", cfg.batch_split},
         {"learning_rate", cfg.learning_rate},
         {"weight_decay", cfg.weight_decay},
         {"adaptive", cfg.adaptive},
         {"gamma", cfg.robust.gamma},
         {"gamma_prime", cfg.robust.gamma_prime},
         {"lambda", cfg.robust.lambda},
         {"labeled_cost", cfg.robust.labeled_cost == CostKind::L2 ? "l2" : "l2_squared"},
         {"unlabeled_cost", cfg.robust.unlabeled_cost == CostKind::L2 ? "l2" : "l2_squared"},
         {"inner", inner_to_json(cfg.robust.inner)},
         {"seed", cfg.seed},
         {"model", cfg.model.kind == ModelSpec::Kind::Linear ? "linear" : "mlp"},
         {"normalize", cfg.model.normalize},
         {"use_bias", cfg.model.use_bias},
         {"hidden", cfg.model.hidden},
         {"outputs", cfg.model.outputs},
         {"leaky_slope", cfg.model.leaky_slope}};
  std::ofstream out(path);
  if (!out) throw Error("write_train_config_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

TrainConfig read_train_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_train_config_json: cannot open " + path);
  json j = json::parse(in);
  TrainConfig cfg;
  cfg.epochs = j.at("epochs");
  cfg.batch_split = j.at("batch_split");
  cfg.learning_rate = j.at("learning_rate");
  cfg.weight_decay = j.at("weight_decay");
  cfg.adaptive = j.at("adaptive");
  cfg.robust.gamma = j.at("gamma");
  cfg.robust.gamma_prime = j.at("gamma_prime");
  cfg.robust.lambda = j.at("lambda");
  cfg.robust.labeled_cost = j.at("labeled_cost") == "l2" ? CostKind::L2 : CostKind::L2Squared;
  cfg.robust.unlabeled_cost =
      j.at("unlabeled_cost") == "l2" ? CostKind::L2 : CostKind::L2Squared;
  cfg.robust.inner = inner_from_json(j.at("inner"));
  cfg.seed = j.at("seed");
  cfg.model.kind = j.at("model") == "linear" ? ModelSpec::Kind::Linear : ModelSpec::Kind::Mlp;
  cfg.model.normalize = j.at("normalize");
  cfg.model.use_bias = j.at("use_bias");
  cfg.model.hidden = j.at("hidden").get<std::vector<int>>();
  cfg.model.outputs = j.at("outputs");
  cfg.model.leaky_slope = j.at("leaky_slope");
  return cfg;
}

void write_train_report(const TrainReport& report, const std::string& json_path,
                        const std::string& epochs_csv_path) {
  json j{{"epochs", report.total_obj.size()},
         {"wall_clock_sec", report.wall_clock_sec},
         {"test_accuracy", report.test_accuracy},
         {"labeled_obj", report.labeled_obj},
         {"unlabeled_obj", report.unlabeled_obj},
         {"total_obj", report.total_obj}};
  std::ofstream out(json_path);
  if (!out) throw Error("write_train_report: cannot open " + json_path);
  out << j.dump(2) << "\n";

  std::ofstream csv(epochs_csv_path);
  if (!csv) throw Error("write_train_report: cannot open " + epochs_csv_path);
  csv << "epoch,labeled_obj,unlabeled_obj,total_obj\n";
  char buf[128];
  for (std::size_t e = 0; e < report.total_obj.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", e, report.labeled_obj[e],
                  report.unlabeled_obj[e], report.total_obj[e]);
    csv << buf;
  }
}

}  // namespace rss
