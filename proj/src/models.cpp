#include "rss/models.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>

namespace rss {

using json = nlohmann::json;

double LinearParams::score(const Vector& x) const {
  require(x.size() == w.size(), "LinearParams: dimension mismatch");
  return w.dot(x) + (use_bias ? bias : 0.0);
}

MlpParams MlpParams::init(const std::vector<int>& sizes, Rng& rng, double leaky_slope) {
  require(sizes.size() >= 2, "MlpParams: need at least input and output sizes");
  MlpParams p;
  p.sizes = sizes;
  p.leaky_slope = leaky_slope;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    require(sizes[l] >= 1 && sizes[l + 1] >= 1, "MlpParams: layer sizes must be >= 1");
    const double r = 1.0 / std::sqrt(double(sizes[l]));
    Matrix w(sizes[l + 1], sizes[l]);
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) w(i, j) = (2.0 * rng.uniform() - 1.0) * r;
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(sizes[l + 1]));
  }
  return p;
}

void MlpParams::validate() const {
  require(sizes.size() >= 2, "MlpParams: need at least two layer sizes");
  require(weights.size() == sizes.size() - 1 && biases.size() == weights.size(),
          "MlpParams: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    require(weights[l].rows() == sizes[l + 1] && weights[l].cols() == sizes[l],
            "MlpParams: weight shape mismatch at layer " + std::to_string(l));
    require(biases[l].size() == sizes[l + 1], "MlpParams: bias shape mismatch");
    require(weights[l].allFinite() && biases[l].allFinite(),
            "MlpParams: non-finite parameters at layer " + std::to_string(l));
  }
}

namespace {

double leaky(double v, double slope) { return v >= 0.0 ? v : slope * v; }
double leaky_deriv(double v, double slope) { return v >= 0.0 ? 1.0 : slope; }

struct ForwardTrace {
  std::vector<Vector> pre;   // pre-activations per layer
  std::vector<Vector> post;  // post-activations (post.back() = scores)
};

ForwardTrace forward(const MlpParams& p, const Vector& x) {
  require(x.size() == p.input_dim(), "MlpParams: input dimension mismatch");
  ForwardTrace tr;
  Vector a = x;
  const std::size_t L = p.weights.size();
  for (std::size_t l = 0; l < L; ++l) {
    Vector z = p.weights[l] * a + p.biases[l];
    if (!z.allFinite())
      throw Error("MlpParams: non-finite activation at layer " + std::to_string(l));
    tr.pre.push_back(z);
    if (l + 1 < L) {
      a = z.unaryExpr([&](double v) { return leaky(v, p.leaky_slope); });
    } else {
      a = z;  // linear output head
    }
    tr.post.push_back(a);
  }
  return tr;
}

// stable log(1 + e^t)
double log1pexp(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace

// Subgradient 0 at the hinge kinks.
void margin_loss_scalar(const LossSpec& loss, double f, int y, double* value, double* dfdv) {
  switch (loss.kind) {
    case LossKind::Hinge01Surrogate: {
      const double v = 1.0 - loss.gamma * double(y) * f;
      if (v <= 0.0) {
        *value = 0.0;
        *dfdv = 0.0;
      } else if (v >= 1.0) {
        *value = 1.0;
        *dfdv = 0.0;
      } else {
        *value = v;
        *dfdv = -loss.gamma * double(y);
      }
      break;
    }
    case LossKind::SquaredMargin: {
      const double v = 1.0 - loss.gamma * f * f;
      if (v <= 0.0) {
        *value = 0.0;
        *dfdv = 0.0;
      } else {
        *value = v;
        *dfdv = -2.0 * loss.gamma * f;
      }
      break;
    }
    case LossKind::CrossEntropy: {
      const double t = -double(y) * f;
      *value = log1pexp(t);
      *dfdv = -double(y) / (1.0 + std::exp(double(y) * f));
      break;
    }
  }
}

Vector MlpParams::scores(const Vector& x) const { return forward(*this, x).post.back(); }

int MlpParams::predict(const Vector& x) const {
  require(output_dim() == 2, "MlpParams::predict: binary heads use 2 scores");
  return margin(x) >= 0.0 ? +1 : -1;
}

double MlpParams::margin(const Vector& x) const {
  require(output_dim() == 2, "MlpParams::margin: binary heads use 2 scores");
  const Vector s = scores(x);
  return s[1] - s[0];
}

int Model::predict(const Vector& x) const {
  return is_linear() ? linear().predict(x) : mlp().predict(x);
}

LinearGrad loss_and_grad(const LinearParams& model, const Vector& x, int y,
                         const LossSpec& loss) {
  require(y == 1 || y == -1, "loss_and_grad: y must be +-1");
  LinearGrad out;
  const double f = model.score(x);
  double dfdv = 0.0;
  margin_loss_scalar(loss, f, y, &out.value, &dfdv);
  out.w_grad = dfdv * x;
  out.bias_grad = model.use_bias ? dfdv : 0.0;
  out.x_grad = dfdv * model.w;
  if (!std::isfinite(out.value) || !out.w_grad.allFinite() || !out.x_grad.allFinite())
    throw Error("loss_and_grad(linear): non-finite result");
  return out;
}

MlpGrad loss_and_grad(const MlpParams& model, const Vector& x, int y, const LossSpec& loss) {
  require(y == 1 || y == -1, "loss_and_grad: y must be +-1");
  model.validate();
  const ForwardTrace tr = forward(model, x);
  const Vector& s = tr.post.back();
  const std::size_t L = model.weights.size();

  MlpGrad out;
  Vector ds(s.size());
  if (loss.kind == LossKind::CrossEntropy) {
    require(s.size() == 2, "loss_and_grad: cross-entropy head uses 2 scores");
    const int cls = y == 1 ? 1 : 0;
    // softmax CE, computed against the max for stability
    const double mx = s.maxCoeff();
    Vector e = (s.array() - mx).exp();
    const double zsum = e.sum();
    out.value = std::log(zsum) - (s[cls] - mx);
    ds = e / zsum;
    ds[cls] -= 1.0;
  } else {
    require(s.size() == 2, "loss_and_grad: margin losses use 2 scores");
    const double f = s[1] - s[0];
    double dfdv = 0.0;
    margin_loss_scalar(loss, f, y, &out.value, &dfdv);
    ds.setZero();
    ds[1] = dfdv;
    ds[0] = -dfdv;
  }

  out.w_grad.resize(L);
  out.b_grad.resize(L);
  Vector delta = ds;
  for (std::size_t l = L; l-- > 0;) {
    const Vector& input = l == 0 ? x : tr.post[l - 1];
    out.w_grad[l] = delta * input.transpose();
    out.b_grad[l] = delta;
    if (!out.w_grad[l].allFinite())
      throw Error("loss_and_grad(mlp): non-finite gradient at layer " + std::to_string(l));
    Vector back = model.weights[l].transpose() * delta;
    if (l > 0) {
      const Vector& z = tr.pre[l - 1];
      delta = back.cwiseProduct(
          z.unaryExpr([&](double v) { return leaky_deriv(v, model.leaky_slope); }));
    } else {
      out.x_grad = back;
    }
  }
  return out;
}

PointLoss point_loss(const LinearParams& model, const LossSpec& loss, int y) {
  return PointLoss{
      [model, loss, y](const Vector& z) { return loss_and_grad(model, z, y, loss).value; },
      [model, loss, y](const Vector& z) { return loss_and_grad(model, z, y, loss).x_grad; }};
}

PointLoss point_loss(const MlpParams& model, const LossSpec& loss, int y) {
  return PointLoss{
      [&model, loss, y](const Vector& z) { return loss_and_grad(model, z, y, loss).value; },
      [&model, loss, y](const Vector& z) { return loss_and_grad(model, z, y, loss).x_grad; }};
}

PointLoss point_loss(const Model& model, const LossSpec& loss, int y) {
  return model.is_linear() ? point_loss(model.linear(), loss, y)
                           : point_loss(model.mlp(), loss, y);
}

namespace {

void append_value(std::string& line, double v, bool first) {
  if (!first) line += ',';
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_model: cannot open " + path);
  std::string line;
  if (model.is_linear()) {
    const LinearParams& p = model.linear();
    json header = {{"kind", "linear"},
                   {"layers", {int(p.w.size())}},
                   {"normalize", p.normalize},
                   {"use_bias", p.use_bias}};
    out << header.dump() << "\n";
    for (int i = 0; i < p.w.size(); ++i) append_value(line, p.w[i], i == 0);
    if (p.use_bias) append_value(line, p.bias, false);
  } else {
    const MlpParams& p = model.mlp();
    json header = {{"kind", "mlp"}, {"layers", p.sizes}, {"leaky_slope", p.leaky_slope}};
    out << header.dump() << "\n";
    bool first = true;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      for (int i = 0; i < p.weights[l].rows(); ++i)
        for (int j = 0; j < p.weights[l].cols(); ++j) {
          append_value(line, p.weights[l](i, j), first);
          first = false;
        }
      for (int i = 0; i < p.biases[l].size(); ++i) {
        append_value(line, p.biases[l][i], first);
        first = false;
      }
    }
  }
  out << line << "\n";
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_model: cannot open " + path);
  std::string header_line, data_line;
  if (!std::getline(in, header_line) || !std::getline(in, data_line))
    throw Error("load_model: truncated file " + path);
  json header = json::parse(header_line);

  std::vector<double> values;
  std::string cur;
  for (char c : data_line + ",") {
    if (c == ',') {
      if (!cur.empty()) values.push_back(std::stod(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }

  Model model;
  const std::string kind = header.at("kind");
  if (kind == "linear") {
    LinearParams p;
    p.normalize = header.at("normalize");
    p.use_bias = header.at("use_bias");
    const int d = header.at("layers")[0];
    require(int(values.size()) == d + (p.use_bias ? 1 : 0), "load_model: parameter count mismatch");
    p.w.resize(d);
    for (int i = 0; i < d; ++i) p.w[i] = values[i];
    if (p.use_bias) p.bias = values[d];
    model.value = p;
  } else if (kind == "mlp") {
    MlpParams p;
    p.sizes = header.at("layers").get<std::vector<int>>();
    p.leaky_slope = header.at("leaky_slope");
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < p.sizes.size(); ++l) {
      Matrix w(p.sizes[l + 1], p.sizes[l]);
      for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) {
          require(pos < values.size(), "load_model: parameter count mismatch");
          w(i, j) = values[pos++];
        }
      Vector b(p.sizes[l + 1]);
      for (int i = 0; i < b.size(); ++i) {
        require(pos < values.size(), "load_model: parameter count mismatch");
        b[i] = values[pos++];
      }
      p.weights.push_back(std::move(w));
      p.biases.push_back(std::move(b));
    }
    require(pos == values.size(), "load_model: trailing parameters");
    p.validate();
    model.value = p;
  } else {
    throw Error("load_model: unknown model kind '" + kind + "'");
  }
  return model;
}

}  // namespace rss
