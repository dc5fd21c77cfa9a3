#include "newsmotion/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "newsmotion/random.hpp"
#include "newsmotion/strings.hpp"

namespace newsmotion {

static_assert(std::endian::native == std::endian::little, "model files assume little-endian");

namespace {

struct ForwardPass {
  std::vector<Eigen::MatrixXd> pre;         // pre-activations per layer
  std::vector<Eigen::MatrixXd> activations;  // activations[0] is the input
};

ForwardPass run_forward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  ForwardPass pass;
  pass.activations.push_back(inputs);
  for (std::size_t l = 0; l < model.layers(); ++l) {
    Eigen::MatrixXd z = model.weights(l) * pass.activations.back();
    z.colwise() += model.biases(l);
    pass.pre.push_back(z);
    if (l + 1 < model.layers()) pass.activations.push_back(z.cwiseMax(0.0));
  }
  return pass;
}

std::size_t label_index(Label l) { return l == Label::positive ? 0 : 1; }

Eigen::MatrixXd to_columns(const FeatureMatrix& m) {
  const auto dim = m.layout.dimension();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(m.rows.size()));
  for (std::size_t j = 0; j < m.rows.size(); ++j) {
    for (std::size_t i = 0; i < dim; ++i) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.rows[j].values[i];
    }
  }
  return out;
}

double error_on(const MlpModel& model, const Eigen::MatrixXd& inputs,
                const std::vector<Label>& labels) {
  const auto pass = run_forward(model, inputs);
  const auto& logits = pass.pre.back();
  std::size_t wrong = 0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const auto p = softmax2(logits(0, j), logits(1, j));
    if (to_prediction(p).label != labels[static_cast<std::size_t>(j)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

void write_line(std::ostream& out, const char* key, const std::vector<double>& values) {
  out << key;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

}  // namespace

MlpModel::MlpModel(std::vector<std::size_t> dims, std::vector<Eigen::MatrixXd> weights,
                   std::vector<Eigen::VectorXd> biases)
    : dims_(std::move(dims)), weights_(std::move(weights)), biases_(std::move(biases)) {
  if (dims_.size() < 2) throw ValidationError("model needs at least input and output dims");
  if (dims_.back() != 2) throw ValidationError("output layer must have exactly 2 units");
  for (auto d : dims_) {
    if (d == 0) throw ValidationError("layer dimensions must be positive");
  }
  if (weights_.size() != dims_.size() - 1 || biases_.size() != dims_.size() - 1) {
    throw ValidationError("parameter count does not match layer dims");
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].rows() != static_cast<Eigen::Index>(dims_[l + 1]) ||
        weights_[l].cols() != static_cast<Eigen::Index>(dims_[l]) ||
        biases_[l].size() != static_cast<Eigen::Index>(dims_[l + 1])) {
      throw ValidationError("parameter shapes do not chain at layer " + std::to_string(l));
    }
  }
}

MlpModel MlpModel::init(std::vector<std::size_t> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw ValidationError("model needs at least input and output dims");
  for (auto d : dims) {
    if (d == 0) throw ValidationError("layer dimensions must be positive");
  }
  Rng rng(seed);
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(dims[l]);
    const auto fan_out = static_cast<Eigen::Index>(dims[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) w(r, c) = uniform(rng, -limit, limit);
    }
    weights.push_back(std::move(w));
    biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  MlpModel model(std::move(dims), std::move(weights), std::move(biases));
  model.metadata_.seed = seed;
  return model;
}

void MlpModel::set_layout(const FeatureLayout& layout) {
  if (layout.dimension() != input_dim()) {
    throw ValidationError("layout dimension " + std::to_string(layout.dimension()) +
                          " does not match model input " + std::to_string(input_dim()));
  }
  layout_ = layout;
}

bool MlpModel::finite() const {
  for (std::size_t l = 0; l < layers(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.dims_ != b.dims_ || !(a.layout_ == b.layout_) || !(a.metadata_ == b.metadata_)) return false;
  for (std::size_t l = 0; l < a.layers(); ++l) {
    if (a.weights_[l] != b.weights_[l] || a.biases_[l] != b.biases_[l]) return false;
  }
  return true;
}

Probabilities softmax2(double logit_up, double logit_down) {
  const double m = std::max(logit_up, logit_down);
  const double eu = std::exp(logit_up - m);
  const double ed = std::exp(logit_down - m);
  const double z = eu + ed;
  return {eu / z, ed / z};
}

Probabilities forward(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw ValidationError("input has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(model.input_dim()));
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t l = 0; l < model.layers(); ++l) {
    Eigen::VectorXd z = model.weights(l) * a + model.biases(l);
    a = l + 1 < model.layers() ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return softmax2(a(0), a(1));
}

LossAndGradients loss_and_gradients(const MlpModel& model, const Batch& batch, double l2) {
  const auto n = batch.inputs.cols();
  if (n == 0) throw ValidationError("empty batch");
  if (static_cast<std::size_t>(n) != batch.labels.size()) {
    throw ValidationError("batch inputs and labels differ in length");
  }
  if (batch.inputs.rows() != static_cast<Eigen::Index>(model.input_dim())) {
    throw ValidationError("batch feature count does not match model input");
  }

  const auto pass = run_forward(model, batch.inputs);
  const auto& logits = pass.pre.back();
  Eigen::MatrixXd delta(2, n);
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double m = std::max(logits(0, j), logits(1, j));
    const double lse = m + std::log(std::exp(logits(0, j) - m) + std::exp(logits(1, j) - m));
    const auto y = static_cast<Eigen::Index>(label_index(batch.labels[static_cast<std::size_t>(j)]));
    total += lse - logits(y, j);
    for (Eigen::Index k = 0; k < 2; ++k) {
      delta(k, j) = std::exp(logits(k, j) - lse) - (k == y ? 1.0 : 0.0);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  delta *= inv_n;

  LossAndGradients out;
  out.loss = total * inv_n;
  const auto layers = model.layers();
  out.gradients.weights.resize(layers);
  out.gradients.biases.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    out.gradients.weights[l] = delta * pass.activations[l].transpose();
    out.gradients.biases[l] = delta.rowwise().sum();
    if (l2 != 0.0) {
      out.gradients.weights[l] += l2 * model.weights(l);
      out.loss += 0.5 * l2 * model.weights(l).squaredNorm();
    }
    if (l > 0) {
      Eigen::MatrixXd back = model.weights(l).transpose() * delta;
      delta = back.cwiseProduct((pass.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return out;
}

double loss(const MlpModel& model, const Batch& batch, double l2) {
  return loss_and_gradients(model, batch, l2).loss;
}

void TrainConfig::validate() const {
  for (auto h : hidden) {
    if (h == 0) throw ValidationError("hidden layer sizes must be positive");
  }
  if (!(learning_rate > 0.0) || !(lr_decay > 0.0)) {
    throw ValidationError("learning rate and decay must be positive");
  }
  if (batch_size == 0 || decay_every == 0) {
    throw ValidationError("batch size and decay interval must be positive");
  }
  if (l2 < 0.0) throw ValidationError("l2 must be non-negative");
}

MlpModel train(const FeatureMatrix& train_set, const FeatureMatrix& validation,
               const TrainConfig& config) {
  config.validate();
  if (train_set.rows.empty() || validation.rows.empty()) {
    throw ValidationError("training and validation sets must be non-empty");
  }
  if (!(train_set.layout == validation.layout)) {
    throw ValidationError("training and validation layouts differ");
  }

  std::vector<std::size_t> dims{train_set.layout.dimension()};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(2);
  MlpModel model = MlpModel::init(dims, config.seed);
  model.set_layout(train_set.layout);
  if (config.epochs == 0) return model;

  const Eigen::MatrixXd x_train = to_columns(train_set);
  const Eigen::MatrixXd x_valid = to_columns(validation);
  std::vector<Label> y_train, y_valid;
  for (const auto& r : train_set.rows) y_train.push_back(r.label);
  for (const auto& r : validation.rows) y_valid.push_back(r.label);

  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.rows.size());
  std::iota(order.begin(), order.end(), 0);

  MlpModel best = model;
  double best_error = error_on(model, x_valid, y_valid);
  std::size_t best_epoch = 0;
  std::size_t stale = 0;
  TrainingMetadata meta;
  meta.seed = config.seed;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.learning_rate *
                      std::pow(config.lr_decay, static_cast<double>(epoch / config.decay_every));
    shuffle(std::span<std::size_t>(order), shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Batch batch;
      batch.inputs.resize(x_train.rows(), static_cast<Eigen::Index>(end - start));
      for (std::size_t j = start; j < end; ++j) {
        batch.inputs.col(static_cast<Eigen::Index>(j - start)) =
            x_train.col(static_cast<Eigen::Index>(order[j]));
        batch.labels.push_back(y_train[order[j]]);
      }
      auto lg = loss_and_gradients(model, batch, config.l2);
      if (!std::isfinite(lg.loss)) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) +
                              ", batch starting at row " + std::to_string(start) +
                              " (loss is not finite); lower the learning rate");
      }
      epoch_loss += lg.loss * static_cast<double>(end - start);
      for (std::size_t l = 0; l < model.layers(); ++l) {
        model.weights(l) -= lr * lg.gradients.weights[l];
        model.biases(l) -= lr * lg.gradients.biases[l];
      }
    }
    if (!model.finite()) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) +
                            " (non-finite parameters)");
    }

    const double valid_error = error_on(model, x_valid, y_valid);
    meta.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    meta.valid_error.push_back(valid_error);
    meta.epochs_run = epoch + 1;
    if (valid_error < best_error) {
      best_error = valid_error;
      best = model;
      best_epoch = epoch + 1;
      stale = 0;
    } else if (config.patience > 0 && ++stale >= config.patience) {
      break;
    }
  }

  meta.best_epoch = best_epoch;
  best.metadata() = meta;
  return best;
}

Prediction to_prediction(const Probabilities& p) {
  return {p.up > p.down ? Label::positive : Label::negative, p.up - p.down};
}

Prediction predict(const MlpModel& model, const FeatureVector& x) {
  if (!(x.layout == model.layout())) {
    throw ValidationError("feature layout " + x.layout.to_string() + " does not match model layout " +
                          model.layout().to_string());
  }
  return to_prediction(forward(model, x.values));
}

Prediction predict(const MlpModel& model, std::span<const double> x) {
  return to_prediction(forward(model, x));
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const auto& meta = model.metadata();
  out << "newsmotion-mlp 1\n";
  out << "dims";
  for (auto d : model.dims()) out << ' ' << d;
  out << '\n';
  const auto layout = model.layout().to_string();
  out << "layout " << (layout.empty() ? "none" : layout) << '\n';
  out << "seed " << meta.seed << '\n';
  out << "epochs_run " << meta.epochs_run << '\n';
  out << "best_epoch " << meta.best_epoch << '\n';
  write_line(out, "train_loss", meta.train_loss);
  write_line(out, "valid_error", meta.valid_error);
  out << "end\n";

  const auto write_doubles = [&](const double* data, std::size_t count) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  };
  for (std::size_t l = 0; l < model.layers(); ++l) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = model.weights(l);
    write_doubles(w.data(), static_cast<std::size_t>(w.size()));
    write_doubles(model.biases(l).data(), static_cast<std::size_t>(model.biases(l).size()));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  const auto next_line = [&]() {
    if (!std::getline(in, line)) throw ParseError("truncated model header", line_no + 1);
    ++line_no;
    return std::string_view(line);
  };
  if (next_line() != "newsmotion-mlp 1") throw ParseError("not a newsmotion model file", 1);

  std::vector<std::size_t> dims;
  FeatureLayout layout;
  TrainingMetadata meta;
  while (true) {
    const auto text = next_line();
    if (text == "end") break;
    const auto space = text.find(' ');
    const auto key = text.substr(0, space);
    const auto rest = space == std::string_view::npos ? std::string_view{} : text.substr(space + 1);
    std::vector<std::string_view> values;
    for (auto v : split(rest, ' ')) {
      if (!v.empty()) values.push_back(v);
    }
    try {
      if (key == "dims") {
        for (auto v : values) dims.push_back(parse_size(v));
      } else if (key == "layout") {
        if (rest != "none") layout = FeatureLayout::parse(rest);
      } else if (key == "seed") {
        meta.seed = std::stoull(std::string(rest));
      } else if (key == "epochs_run") {
        meta.epochs_run = parse_size(rest);
      } else if (key == "best_epoch") {
        meta.best_epoch = parse_size(rest);
      } else if (key == "train_loss") {
        for (auto v : values) meta.train_loss.push_back(parse_double(v));
      } else if (key == "valid_error") {
        for (auto v : values) meta.valid_error.push_back(parse_double(v));
      } else {
        throw ParseError("unknown header key '" + std::string(key) + "'");
      }
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (dims.size() < 2) throw ParseError("model header lacks dims");

  const auto read_doubles = [&](double* data, std::size_t count) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ParseError("truncated model body");
  };
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(
        static_cast<Eigen::Index>(dims[l + 1]), static_cast<Eigen::Index>(dims[l]));
    read_doubles(w.data(), static_cast<std::size_t>(w.size()));
    Eigen::VectorXd b(static_cast<Eigen::Index>(dims[l + 1]));
    read_doubles(b.data(), static_cast<std::size_t>(b.size()));
    weights.emplace_back(w);
    biases.push_back(std::move(b));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after model body");

  MlpModel model(std::move(dims), std::move(weights), std::move(biases));
  if (layout.dimension() > 0) model.set_layout(layout);
  model.metadata() = std::move(meta);
  return model;
}

}  // namespace newsmotion
