// Generative scan model g: normalized position -> normalized scan.
//
// A small decoder: fully connected layers, a reshape to (channels, length),
// then a stack of 1-D transposed convolutions and convolutions, and a
// center crop to the beam count. All arithmetic is double precision.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fepl/normalize.hpp"
#include "fepl/world.hpp"

namespace fepl {

enum class Activation : std::uint32_t { kIdentity = 0, kRelu = 1 };
enum class LayerKind : std::uint32_t { kDense = 0, kConvTranspose = 1, kConv = 2 };

struct LayerSpec {
  LayerKind kind{LayerKind::kDense};
  int in{0};       // features (dense) or channels (conv)
  int out{0};
  int kernel{1};
  int stride{1};
  int padding{0};
  Activation activation{Activation::kRelu};

  std::size_t parameter_count() const noexcept;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Architecture {
  int input_dim{2};
  std::vector<LayerSpec> dense;
  int reshape_channels{0};
  int reshape_length{0};
  std::vector<LayerSpec> conv;
  int output_length{0};  // B; the conv output is center-cropped to this

  /// Throws ValidationError if the layers do not chain.
  void validate() const;
  /// Length produced by the conv stack before cropping.
  int conv_output_length() const;
  int crop_offset() const { return (conv_output_length() - output_length) / 2; }
  std::size_t parameter_count() const noexcept;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// FC 2->hidden, FC hidden->(channels x stem), two [transposed conv k8 s4 ->
/// conv k5 p2] blocks, a 1x1 conv to one channel, crop to beam_count.
/// The stem length is ceil(B/16)+1, which gives 40 -> 660 -> 622 for B = 622.
Architecture default_architecture(int beam_count = 622, int channels = 32, int hidden = 128);

/// Column u (0) and v (1) of dg/dx.
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, 2>;

class GenModel {
 public:
  /// Throws ValidationError on a parameter-count mismatch.
  GenModel(Architecture arch, std::vector<double> params);
  static GenModel zeros(const Architecture& arch);

  const Architecture& architecture() const noexcept { return arch_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> mutable_parameters() noexcept { return params_; }
  int output_dim() const noexcept { return arch_.output_length; }

  NormScan forward(const NormPose& x) const;
  /// Exact dg/dx by forward-mode differentiation (one tangent pass per input
  /// dimension), with ReLU'(0) = 0.
  Jacobian jacobian(const NormPose& x) const;

  struct Evaluation {
    std::vector<double> prediction;
    Jacobian jacobian;
  };
  /// Prediction and Jacobian sharing one primal pass.
  Evaluation evaluate(const NormPose& x) const;

  /// Scratch buffers for the training path; one per thread.
  class Workspace;
  struct WorkspaceDeleter {
    void operator()(Workspace* ws) const noexcept;
  };
  using WorkspacePtr = std::unique_ptr<Workspace, WorkspaceDeleter>;
  WorkspacePtr make_workspace() const;

  /// Predictions for many inputs at once, one column per input.
  Eigen::MatrixXd forward_batch(std::span<const NormPose> xs) const;

  /// Adds weight * d/dparams sum_i |g(x)_i - target_i| to grad and returns
  /// sum_i |g(x)_i - target_i|. sign(0) is taken as 0.
  double accumulate_l1_gradient(const NormPose& x, std::span<const double> target, double weight,
                                std::span<double> grad, Workspace& ws) const;
  /// Batched form: targets is B x xs.size(); returns the summed absolute error.
  double accumulate_l1_gradient(std::span<const NormPose> xs,
                                const Eigen::Ref<const Eigen::MatrixXd>& targets, double weight,
                                std::span<double> grad, Workspace& ws) const;

 private:
  Architecture arch_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;  // start of each layer's block, dense then conv
};

GenModel init_model(const Architecture& arch, Rng& rng);

}  // namespace fepl
