#include "nextcall/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

namespace nextcall {

NoExamplesError::NoExamplesError() : std::runtime_error("training set is empty") {}
SingleClassError::SingleClassError()
    : std::runtime_error("training needs at least two distinct classes") {}
NonFiniteLossError::NonFiniteLossError()
    : std::runtime_error("loss became non-finite during training") {}
DimensionMismatchError::DimensionMismatchError(const std::string& what)
    : std::runtime_error(what) {}
ModelFormatError::ModelFormatError(const std::string& what) : std::runtime_error(what) {}

namespace {

// Scores -> probabilities in place, max-shifted for stability.
void softmax_inplace(std::vector<double>& scores) {
  double hi = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - hi);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

void check_inputs(std::span<const std::vector<double>> x, std::span<const std::size_t> labels,
                  std::size_t n_classes, std::size_t dim) {
  if (x.size() != labels.size()) {
    throw DimensionMismatchError("feature and label counts differ");
  }
  for (const auto& row : x) {
    if (row.size() != dim) throw DimensionMismatchError("feature vector has wrong length");
  }
  for (std::size_t y : labels) {
    if (y >= n_classes) throw DimensionMismatchError("label outside class range");
  }
}

}  // namespace

LossGrad loss_and_gradient(std::span<const double> w, std::span<const double> b,
                           std::size_t n_classes, std::size_t dim,
                           std::span<const std::vector<double>> x,
                           std::span<const std::size_t> labels, double reg_lambda) {
  if (x.empty()) throw NoExamplesError();
  if (w.size() != n_classes * dim || b.size() != n_classes) {
    throw DimensionMismatchError("weight shape does not match (n_classes, dim)");
  }
  check_inputs(x, labels, n_classes, dim);

  LossGrad out;
  out.grad_w.assign(n_classes * dim, 0.0);
  out.grad_b.assign(n_classes, 0.0);

  double nll = 0.0;
  std::vector<double> scores(n_classes);
  double inv_n = 1.0 / static_cast<double>(x.size());

  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& xi = x[i];
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double* wc = w.data() + c * dim;
      double s = b[c];
      for (std::size_t j = 0; j < dim; ++j) s += wc[j] * xi[j];
      scores[c] = s;
    }
    softmax_inplace(scores);
    nll -= std::log(std::max(scores[labels[i]], 1e-300));
    for (std::size_t c = 0; c < n_classes; ++c) {
      double coeff = (scores[c] - (c == labels[i] ? 1.0 : 0.0)) * inv_n;
      double* gc = out.grad_w.data() + c * dim;
      for (std::size_t j = 0; j < dim; ++j) gc[j] += coeff * xi[j];
      out.grad_b[c] += coeff;
    }
  }

  double reg = 0.0;
  for (std::size_t idx = 0; idx < w.size(); ++idx) {
    reg += w[idx] * w[idx];
    out.grad_w[idx] += reg_lambda * w[idx];
  }
  out.loss = nll * inv_n + 0.5 * reg_lambda * reg;
  return out;
}

double loss_only(std::span<const double> w, std::span<const double> b, std::size_t n_classes,
                 std::size_t dim, std::span<const std::vector<double>> x,
                 std::span<const std::size_t> labels, double reg_lambda) {
  if (x.empty()) throw NoExamplesError();
  if (w.size() != n_classes * dim || b.size() != n_classes) {
    throw DimensionMismatchError("weight shape does not match (n_classes, dim)");
  }
  check_inputs(x, labels, n_classes, dim);

  double nll = 0.0;
  std::vector<double> scores(n_classes);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& xi = x[i];
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double* wc = w.data() + c * dim;
      double s = b[c];
      for (std::size_t j = 0; j < dim; ++j) s += wc[j] * xi[j];
      scores[c] = s;
      hi = std::max(hi, s);
    }
    double sum = 0.0;
    for (double s : scores) sum += std::exp(s - hi);
    nll -= scores[labels[i]] - hi - std::log(sum);
  }

  double reg = 0.0;
  for (double v : w) reg += v * v;
  return nll / static_cast<double>(x.size()) + 0.5 * reg_lambda * reg;
}

ModelWeights train(std::span<const std::vector<double>> features,
                   std::span<const std::size_t> labels, std::vector<std::string> class_set,
                   std::span<const std::size_t> continuous_indices, const TrainOptions& options,
                   TrainDiagnostics* diagnostics) {
  if (features.empty()) throw NoExamplesError();
  if (class_set.size() < 2) throw SingleClassError();
  std::size_t n_classes = class_set.size();
  std::size_t dim = features.front().size();
  check_inputs(features, labels, n_classes, dim);
  {
    std::set<std::size_t> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) throw SingleClassError();
  }

  ModelWeights model;
  model.n_classes = n_classes;
  model.dim = dim;
  model.reg_lambda = options.reg_lambda;
  model.class_set = std::move(class_set);
  model.standardization.mean.assign(dim, 0.0);
  model.standardization.scale.assign(dim, 1.0);

  double inv_n = 1.0 / static_cast<double>(features.size());
  for (std::size_t j : continuous_indices) {
    if (j >= dim) throw DimensionMismatchError("continuous index outside feature range");
    double mean = 0.0;
    for (const auto& row : features) mean += row[j];
    mean *= inv_n;
    double var = 0.0;
    for (const auto& row : features) var += (row[j] - mean) * (row[j] - mean);
    var *= inv_n;
    double sd = std::sqrt(var);
    model.standardization.mean[j] = mean;
    model.standardization.scale[j] = sd > 0.0 ? sd : 1.0;
  }

  std::vector<std::vector<double>> x(features.begin(), features.end());
  for (auto& row : x) {
    for (std::size_t j = 0; j < dim; ++j) {
      row[j] = (row[j] - model.standardization.mean[j]) / model.standardization.scale[j];
    }
  }

  std::vector<double> w(n_classes * dim, 0.0);
  std::vector<double> b(n_classes, 0.0);
  std::vector<double> w_trial(w.size());
  std::vector<double> b_trial(b.size());

  LossGrad lg = loss_and_gradient(w, b, n_classes, dim, x, labels, options.reg_lambda);
  if (!std::isfinite(lg.loss)) throw NonFiniteLossError();
  double loss = lg.loss;
  double step = 1.0;
  int iterations = 0;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    double gnorm2 = 0.0;
    for (double g : lg.grad_w) gnorm2 += g * g;
    for (double g : lg.grad_b) gnorm2 += g * g;
    if (gnorm2 == 0.0) break;

    // Armijo backtracking; start from twice the previous accepted step so
    // the search adapts in both directions.
    double trial = std::min(step * 2.0, 1e6);
    double trial_loss = 0.0;
    bool accepted = false;
    while (trial >= 1e-18) {
      for (std::size_t idx = 0; idx < w.size(); ++idx) w_trial[idx] = w[idx] - trial * lg.grad_w[idx];
      for (std::size_t idx = 0; idx < b.size(); ++idx) b_trial[idx] = b[idx] - trial * lg.grad_b[idx];
      trial_loss = loss_only(w_trial, b_trial, n_classes, dim, x, labels, options.reg_lambda);
      if (std::isfinite(trial_loss) && trial_loss <= loss - 1e-4 * trial * gnorm2) {
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) break;  // gradient direction yields no further decrease

    double decrease = loss - trial_loss;
    w.swap(w_trial);
    b.swap(b_trial);
    loss = trial_loss;
    step = trial;
    iterations = iter;
    if (diagnostics) diagnostics->losses.push_back(loss);
    if (!std::isfinite(loss)) throw NonFiniteLossError();
    if (decrease < options.tol) break;

    lg = loss_and_gradient(w, b, n_classes, dim, x, labels, options.reg_lambda);
    if (!std::isfinite(lg.loss)) throw NonFiniteLossError();
  }

  model.w = std::move(w);
  model.b = std::move(b);
  model.meta.n_train = features.size();
  model.meta.iterations = iterations;
  model.meta.final_loss = loss;
  return model;
}

std::vector<double> predict_proba(const ModelWeights& model, std::span<const double> x) {
  if (x.size() != model.dim) throw DimensionMismatchError("feature vector has wrong length");
  std::vector<double> scores(model.n_classes);
  for (std::size_t c = 0; c < model.n_classes; ++c) {
    const double* wc = model.w.data() + c * model.dim;
    double s = model.b[c];
    for (std::size_t j = 0; j < model.dim; ++j) {
      double z = (x[j] - model.standardization.mean[j]) / model.standardization.scale[j];
      s += wc[j] * z;
    }
    scores[c] = s;
  }
  softmax_inplace(scores);
  return scores;
}

namespace {

constexpr char kMagic[4] = {'N', 'X', 'C', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_model(const ModelWeights& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u64(out, model.n_classes);
  put_u64(out, model.dim);
  for (const auto& id : model.class_set) {
    put_u64(out, id.size());
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  put_f64(out, model.reg_lambda);
  for (double v : model.standardization.mean) put_f64(out, v);
  for (double v : model.standardization.scale) put_f64(out, v);
  for (double v : model.w) put_f64(out, v);
  for (double v : model.b) put_f64(out, v);
  put_u64(out, model.meta.n_train);
  put_u32(out, static_cast<std::uint32_t>(model.meta.iterations));
  put_f64(out, model.meta.final_loss);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ModelWeights load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ModelFormatError("bad magic in " + path);
  }
  std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw ModelFormatError("unsupported model version " + std::to_string(version));
  }

  ModelWeights model;
  model.n_classes = get_u64(in);
  model.dim = get_u64(in);
  if (!in || model.n_classes == 0 || model.n_classes > 1'000'000 || model.dim == 0 ||
      model.dim > 1'000'000) {
    throw ModelFormatError("implausible shape in " + path);
  }
  model.class_set.resize(model.n_classes);
  for (auto& id : model.class_set) {
    std::uint64_t len = get_u64(in);
    if (!in || len > 1'000'000) throw ModelFormatError("implausible id length in " + path);
    id.resize(len);
    in.read(id.data(), static_cast<std::streamsize>(len));
  }
  model.reg_lambda = get_f64(in);
  model.standardization.mean.resize(model.dim);
  for (auto& v : model.standardization.mean) v = get_f64(in);
  model.standardization.scale.resize(model.dim);
  for (auto& v : model.standardization.scale) v = get_f64(in);
  model.w.resize(model.n_classes * model.dim);
  for (auto& v : model.w) v = get_f64(in);
  model.b.resize(model.n_classes);
  for (auto& v : model.b) v = get_f64(in);
  model.meta.n_train = get_u64(in);
  model.meta.iterations = static_cast<int>(get_u32(in));
  model.meta.final_loss = get_f64(in);
  if (!in) throw ModelFormatError("truncated model file " + path);
  return model;
}

}  // namespace nextcall
