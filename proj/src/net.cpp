#include "poster/net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "poster/storage.hpp"

namespace poster {

std::vector<std::size_t> default_hidden(std::size_t depth) {
  if (depth == 1) return {};
  if (depth == 3) return kDefaultHidden3;
  throw InvalidArgument("depth " + std::to_string(depth) +
                        " has no default hidden widths; pass them explicitly");
}

MLPClassifier::MLPClassifier(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidArgument("model needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.size() != l.weights.rows()) {
      throw DimensionMismatch("layer " + std::to_string(i) + " bias", l.out_dim(),
                              static_cast<std::size_t>(l.bias.size()));
    }
    if (l.in_dim() == 0) throw InvalidArgument("layer " + std::to_string(i) + " has no inputs");
    if (i > 0 && l.in_dim() != layers_[i - 1].out_dim()) {
      throw DimensionMismatch("layer " + std::to_string(i) + " input", layers_[i - 1].out_dim(),
                              l.in_dim());
    }
  }
  if (layers_.back().out_dim() != 1) {
    throw DimensionMismatch("output layer", 1, layers_.back().out_dim());
  }
}

MLPClassifier MLPClassifier::zeros(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw InvalidArgument("need at least input and output dims");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(dims[i]);
    const auto out = static_cast<Eigen::Index>(dims[i + 1]);
    layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
  return MLPClassifier(std::move(layers));
}

MLPClassifier MLPClassifier::glorot(std::size_t input_dim, std::span<const std::size_t> hidden,
                                    std::uint64_t seed) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  auto model = zeros(dims);
  std::mt19937_64 rng(seed);
  for (auto& l : model.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill so the draw order matches the checkpoint layout.
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = dist(rng);
    }
  }
  return model;
}

std::size_t MLPClassifier::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.parameter_count();
  return n;
}

std::vector<std::size_t> MLPClassifier::dims() const {
  std::vector<std::size_t> d;
  if (layers_.empty()) return d;
  d.push_back(input_dim());
  for (const auto& l : layers_) d.push_back(l.out_dim());
  return d;
}

double MLPClassifier::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) throw DimensionMismatch("model input", input_dim(), x.size());
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::VectorXd z = layers_[i].weights * a + layers_[i].bias;
    a = (i + 1 < layers_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a(0);
}

Eigen::VectorXd MLPClassifier::forward(const Eigen::MatrixXd& batch) const {
  if (static_cast<std::size_t>(batch.cols()) != input_dim()) {
    throw DimensionMismatch("model input", input_dim(), static_cast<std::size_t>(batch.cols()));
  }
  Eigen::MatrixXd a = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXd z = a * layers_[i].weights.transpose();
    z.rowwise() += layers_[i].bias.transpose();
    a = (i + 1 < layers_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
  }
  return a.col(0);
}

bool MLPClassifier::operator==(const MLPClassifier& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols()) return false;
    if (a.weights != b.weights || a.bias != b.bias) return false;
  }
  return true;
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logit(double z, double y) noexcept {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

double bce_loss(double p, double y) noexcept {
  constexpr double kClamp = 1e-15;
  p = std::clamp(p, kClamp, 1.0 - kClamp);
  return -(y * std::log(p) + (1.0 - y) * std::log1p(-p));
}

int predict(const MLPClassifier& model, std::span<const double> x) {
  return predict_logit(model.forward(x));
}

std::vector<int> predict(const MLPClassifier& model, const Eigen::MatrixXd& batch) {
  const Eigen::VectorXd logits = model.forward(batch);
  std::vector<int> out(static_cast<std::size_t>(logits.size()));
  for (Eigen::Index i = 0; i < logits.size(); ++i) out[static_cast<std::size_t>(i)] = predict_logit(logits(i));
  return out;
}

LossAndGradients backward(const MLPClassifier& model, const Eigen::MatrixXd& batch,
                          const Eigen::VectorXd& targets) {
  const auto& layers = model.layers();
  if (batch.rows() == 0) throw InvalidArgument("backward needs a nonempty batch");
  if (targets.size() != batch.rows()) {
    throw DimensionMismatch("targets", static_cast<std::size_t>(batch.rows()),
                            static_cast<std::size_t>(targets.size()));
  }
  if (static_cast<std::size_t>(batch.cols()) != model.input_dim()) {
    throw DimensionMismatch("model input", model.input_dim(), static_cast<std::size_t>(batch.cols()));
  }
  const std::size_t depth = layers.size();
  const double inv_b = 1.0 / static_cast<double>(batch.rows());

  // activations[i] is the input to layer i; pre[i] its pre-activation output.
  std::vector<Eigen::MatrixXd> activations(depth);
  std::vector<Eigen::MatrixXd> pre(depth);
  activations[0] = batch;
  for (std::size_t i = 0; i < depth; ++i) {
    pre[i] = activations[i] * layers[i].weights.transpose();
    pre[i].rowwise() += layers[i].bias.transpose();
    if (i + 1 < depth) activations[i + 1] = pre[i].cwiseMax(0.0);
  }

  LossAndGradients out;
  const Eigen::VectorXd logits = pre.back().col(0);
  Eigen::MatrixXd delta(batch.rows(), 1);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.size(); ++r) {
    loss += bce_with_logit(logits(r), targets(r));
    delta(r, 0) = (sigmoid(logits(r)) - targets(r)) * inv_b;
  }
  out.loss = loss * inv_b;

  out.gradients.layers.resize(depth);
  for (std::size_t i = depth; i-- > 0;) {
    auto& g = out.gradients.layers[i];
    g.weights = delta.transpose() * activations[i];
    g.bias = delta.colwise().sum().transpose();
    if (i == 0) break;
    Eigen::MatrixXd upstream = delta * layers[i].weights;
    delta = upstream.cwiseProduct((pre[i - 1].array() > 0.0).cast<double>().matrix());
  }
  return out;
}

double mean_loss(const MLPClassifier& model, const Eigen::MatrixXd& batch,
                 const Eigen::VectorXd& targets) {
  const Eigen::VectorXd logits = model.forward(batch);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.size(); ++r) loss += bce_with_logit(logits(r), targets(r));
  return loss / static_cast<double>(logits.size());
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state) {
  if (params.size() != grads.size()) {
    throw DimensionMismatch("adam gradient blocks", params.size(), grads.size());
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.size())));
      state.second_moment.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.size())));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw DimensionMismatch("adam moment blocks", state.first_moment.size(), params.size());
  }

  const auto& h = state.hyper;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);

  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto size = static_cast<Eigen::Index>(params[b].size());
    if (grads[b].size() != params[b].size() || state.first_moment[b].size() != size) {
      throw DimensionMismatch("adam block " + std::to_string(b), params[b].size(), grads[b].size());
    }
    Eigen::Map<Eigen::ArrayXd> p(params[b].data(), size);
    Eigen::Map<const Eigen::ArrayXd> g(grads[b].data(), size);
    auto m = state.first_moment[b].array();
    auto v = state.second_moment[b].array();
    m = h.beta1 * m + (1.0 - h.beta1) * g;
    v = h.beta2 * v + (1.0 - h.beta2) * g.square();
    p -= h.learning_rate * (m / c1) / ((v / c2).sqrt() + h.epsilon);
  }
}

void adam_step(MLPClassifier& model, const Gradients& grads, AdamState& state) {
  auto& layers = model.layers();
  if (grads.layers.size() != layers.size()) {
    throw DimensionMismatch("gradient layers", layers.size(), grads.layers.size());
  }
  std::vector<std::span<double>> p;
  std::vector<std::span<const double>> g;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& l = layers[i];
    const auto& gl = grads.layers[i];
    if (gl.weights.rows() != l.weights.rows() || gl.weights.cols() != l.weights.cols() ||
        gl.bias.size() != l.bias.size()) {
      throw DimensionMismatch("gradient layer " + std::to_string(i), l.parameter_count(),
                              gl.parameter_count());
    }
    p.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    p.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    g.emplace_back(gl.weights.data(), static_cast<std::size_t>(gl.weights.size()));
    g.emplace_back(gl.bias.data(), static_cast<std::size_t>(gl.bias.size()));
  }
  adam_step(p, g, state);
}

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidArgument("epochs must be >= 1");
  if (batch_size == 0) throw InvalidArgument("batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning rate must be > 0");
  }
}

TrainResult train(MLPClassifier& model, const Eigen::MatrixXd& inputs,
                  const Eigen::VectorXd& targets, const TrainConfig& cfg) {
  cfg.validate();
  if (inputs.rows() == 0) throw InvalidArgument("cannot train on an empty dataset");
  if (targets.size() != inputs.rows()) {
    throw DimensionMismatch("targets", static_cast<std::size_t>(inputs.rows()),
                            static_cast<std::size_t>(targets.size()));
  }
  if (static_cast<std::size_t>(inputs.cols()) != model.input_dim()) {
    throw DimensionMismatch("model input", model.input_dim(), static_cast<std::size_t>(inputs.cols()));
  }

  const auto rows = static_cast<std::size_t>(inputs.rows());
  std::vector<Eigen::Index> order(rows);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(cfg.seed);
  AdamState adam;
  adam.hyper = cfg.adam();

  TrainResult result;
  result.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < rows; start += cfg.batch_size) {
      const auto stop = std::min(rows, start + cfg.batch_size);
      std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Eigen::MatrixXd xb = inputs(idx, Eigen::all);
      const Eigen::VectorXd yb = targets(idx);
      auto lg = backward(model, xb, yb);
      if (!std::isfinite(lg.loss)) {
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch + 1) +
                               "; try a smaller learning rate than " +
                               std::to_string(cfg.learning_rate));
      }
      epoch_loss += lg.loss * static_cast<double>(stop - start);
      adam_step(model, lg.gradients, adam);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(rows));
  }
  return result;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  std::uint64_t uint(int width) {
    if (pos_ + width > bytes_.size()) throw TruncatedFileError(source_ + ": checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += width;
    return v;
  }
  double f64() { return std::bit_cast<double>(uint(8)); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const MLPClassifier& model) {
  std::string out(kCheckpointMagic);
  put_u32(out, static_cast<std::uint32_t>(model.depth()));
  for (const auto& l : model.layers()) {
    put_u32(out, static_cast<std::uint32_t>(l.out_dim()));
    put_u32(out, static_cast<std::uint32_t>(l.in_dim()));
  }
  for (const auto& l : model.layers()) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) put_f64(out, l.weights(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) put_f64(out, l.bias(r));
  }
  return out;
}

MLPClassifier decode_checkpoint(std::string_view bytes, const std::string& source) {
  if (bytes.size() < kCheckpointMagic.size() ||
      bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw BadMagicError(source + ": not a PFNET1 checkpoint");
  }
  Reader in(bytes.substr(kCheckpointMagic.size()), source);
  const auto depth = in.uint(4);
  if (depth == 0 || depth > 1024) throw ParseError(source, 0, "implausible layer count");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> shapes;
  std::uint64_t params = 0;
  for (std::uint64_t i = 0; i < depth; ++i) {
    const auto out = in.uint(4);
    const auto inp = in.uint(4);
    shapes.emplace_back(out, inp);
    params += out * inp + out;
  }
  if (in.remaining() != params * 8) {
    throw TruncatedFileError(source + ": expected " + std::to_string(params * 8) +
                             " parameter bytes, found " + std::to_string(in.remaining()));
  }
  std::vector<DenseLayer> layers;
  for (auto [out, inp] : shapes) {
    DenseLayer l{Eigen::MatrixXd(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(inp)),
                 Eigen::VectorXd(static_cast<Eigen::Index>(out))};
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = in.f64();
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = in.f64();
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw NonFiniteValueError(source + ": non-finite parameter", 0);
    }
    layers.push_back(std::move(l));
  }
  return MLPClassifier(std::move(layers));
}

void save_checkpoint(const MLPClassifier& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(model));
}

MLPClassifier load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path), path.string());
}

}  // namespace poster
