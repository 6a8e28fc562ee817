#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "poster/error.hpp"

namespace poster {

/// y = W x + b with W stored out_dim x in_dim.
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  std::size_t in_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out_dim() const noexcept { return static_cast<std::size_t>(weights.rows()); }
  std::size_t parameter_count() const noexcept { return weights.size() + bias.size(); }
};

/// Hidden widths used when a 3-layer model is requested without explicit sizes.
inline const std::vector<std::size_t> kDefaultHidden3 = {512, 64};

/// Hidden widths for a given depth: none for depth 1, kDefaultHidden3 for
/// depth 3. Other depths need explicit widths.
std::vector<std::size_t> default_hidden(std::size_t depth);

/// Dense stack with ReLU after every layer except the last, which has a
/// single output unit producing a logit.
class MLPClassifier {
 public:
  MLPClassifier() = default;
  /// Throws InvalidArgument if the layer dimensions do not chain or the last
  /// layer does not have exactly one output.
  explicit MLPClassifier(std::vector<DenseLayer> layers);

  /// All-zero parameters. `dims` = {input, hidden..., 1}.
  static MLPClassifier zeros(std::span<const std::size_t> dims);
  /// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
  static MLPClassifier glorot(std::size_t input_dim, std::span<const std::size_t> hidden,
                              std::uint64_t seed);

  std::size_t depth() const noexcept { return layers_.size(); }
  std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in_dim(); }
  std::size_t parameter_count() const noexcept;
  std::vector<std::size_t> dims() const;

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  /// Logit for one input.
  double forward(std::span<const double> x) const;
  /// Logits for a batch whose rows are samples.
  Eigen::VectorXd forward(const Eigen::MatrixXd& batch) const;

  bool operator==(const MLPClassifier& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Numerically stable logistic function.
double sigmoid(double z) noexcept;

/// Binary cross-entropy evaluated from the logit: max(z,0) - z*y + log1p(exp(-|z|)).
double bce_with_logit(double z, double y) noexcept;

/// Binary cross-entropy from a probability. p is clamped to [1e-15, 1 - 1e-15].
double bce_loss(double p, double y) noexcept;

/// Decision at the 0.5 boundary; a logit of exactly 0 is positive.
inline int predict_logit(double z) noexcept { return z >= 0.0 ? 1 : 0; }
int predict(const MLPClassifier& model, std::span<const double> x);
std::vector<int> predict(const MLPClassifier& model, const Eigen::MatrixXd& batch);

/// Parameter-shaped gradient of the mean batch loss.
struct Gradients {
  std::vector<DenseLayer> layers;
};

struct LossAndGradients {
  double loss = 0.0;  // mean BCE over the batch
  Gradients gradients;
};

/// Backpropagation through dense/ReLU layers into sigmoid + BCE.
/// `batch` rows are samples; `targets` holds 0/1 values.
LossAndGradients backward(const MLPClassifier& model, const Eigen::MatrixXd& batch,
                          const Eigen::VectorXd& targets);

/// Mean BCE without gradients.
double mean_loss(const MLPClassifier& model, const Eigen::MatrixXd& batch,
                 const Eigen::VectorXd& targets);

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moments are kept per parameter block, shaped like the block they track.
struct AdamState {
  AdamHyper hyper;
  std::uint64_t step_count = 0;
  std::vector<Eigen::VectorXd> first_moment;
  std::vector<Eigen::VectorXd> second_moment;
};

/// One bias-corrected Adam update over parallel lists of parameter and
/// gradient blocks. Moments are zero-initialised on the first call.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state);

/// Model-level update; blocks are (weights, bias) per layer in order.
void adam_step(MLPClassifier& model, const Gradients& grads, AdamState& state);

struct TrainConfig {
  std::size_t epochs = 90;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamHyper adam() const noexcept { return {learning_rate, beta1, beta2, epsilon}; }
  void validate() const;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean training loss per epoch
};

/// Mini-batch Adam over a seeded per-epoch permutation. Deterministic for a
/// fixed (model, data, cfg). Throws TrainingDiverged on a non-finite loss.
TrainResult train(MLPClassifier& model, const Eigen::MatrixXd& inputs,
                  const Eigen::VectorXd& targets, const TrainConfig& cfg);

/// Checkpoint layout (little-endian): magic "PFNET1\0\0", u32 layer count,
/// per layer u32 out_dim then u32 in_dim, then per layer the weights
/// row-major followed by the bias as binary64.
inline constexpr std::string_view kCheckpointMagic{"PFNET1\0\0", 8};

std::string encode_checkpoint(const MLPClassifier& model);
MLPClassifier decode_checkpoint(std::string_view bytes, const std::string& source = "<memory>");
void save_checkpoint(const MLPClassifier& model, const std::filesystem::path& path);
MLPClassifier load_checkpoint(const std::filesystem::path& path);

}  // namespace poster
