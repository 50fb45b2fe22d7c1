#include "fepl/genmodel.hpp"

#include <cmath>
#include <string>

#include "fepl/error.hpp"

namespace fepl {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using MapC = Eigen::Map<const Mat>;
using MapM = Eigen::Map<Mat>;

int conv_length(const LayerSpec& l, int lin) {
  if (l.kind == LayerKind::kConv) return (lin + 2 * l.padding - l.kernel) / l.stride + 1;
  return (lin - 1) * l.stride + l.kernel - 2 * l.padding;
}

// Weight matrix shape inside the flat parameter vector (column-major).
std::pair<int, int> weight_shape(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::kDense: return {l.out, l.in};
    case LayerKind::kConv: return {l.out, l.kernel * l.in};
    case LayerKind::kConvTranspose: return {l.kernel * l.out, l.in};
  }
  return {0, 0};
}

void apply_activation(Activation act, const Mat& pre, Mat& out) {
  if (act == Activation::kRelu) {
    out = pre.cwiseMax(0.0);
  } else {
    out = pre;
  }
}

}  // namespace

std::size_t LayerSpec::parameter_count() const noexcept {
  const auto [r, c] = weight_shape(*this);
  return static_cast<std::size_t>(r) * static_cast<std::size_t>(c) + static_cast<std::size_t>(out);
}

void Architecture::validate() const {
  auto bad = [](const std::string& msg) { throw ValidationError("architecture: " + msg); };
  if (input_dim != 2) bad("input_dim must be 2");
  if (dense.empty()) bad("at least one dense layer is required");
  int width = input_dim;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const LayerSpec& l = dense[i];
    if (l.kind != LayerKind::kDense) bad("layer " + std::to_string(i) + " in the dense stack is not dense");
    if (l.in != width) bad("dense layer " + std::to_string(i) + " expects " + std::to_string(l.in) +
                           " inputs but receives " + std::to_string(width));
    if (l.out < 1) bad("dense layer " + std::to_string(i) + " has no outputs");
    width = l.out;
  }
  if (reshape_channels < 1 || reshape_length < 1 ||
      static_cast<long>(reshape_channels) * reshape_length != width) {
    bad("reshape " + std::to_string(reshape_channels) + "x" + std::to_string(reshape_length) +
        " does not match dense output " + std::to_string(width));
  }
  if (conv.empty()) bad("at least one conv layer is required");
  int channels = reshape_channels;
  int length = reshape_length;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const LayerSpec& l = conv[i];
    const std::string tag = "conv layer " + std::to_string(i);
    if (l.kind == LayerKind::kDense) bad(tag + " is dense");
    if (l.in != channels) bad(tag + " expects " + std::to_string(l.in) + " channels but receives " +
                              std::to_string(channels));
    if (l.out < 1 || l.kernel < 1 || l.stride < 1 || l.padding < 0) bad(tag + " has invalid shape");
    if (l.kind == LayerKind::kConvTranspose && l.padding >= l.kernel) bad(tag + " padding too large");
    const int next = conv_length(l, length);
    if (next < 1) bad(tag + " produces an empty output");
    channels = l.out;
    length = next;
  }
  if (channels != 1) bad("final conv layer must have one output channel");
  if (output_length < 1 || length < output_length) {
    bad("conv output length " + std::to_string(length) + " is shorter than the beam count " +
        std::to_string(output_length));
  }
}

int Architecture::conv_output_length() const {
  int length = reshape_length;
  for (const LayerSpec& l : conv) length = conv_length(l, length);
  return length;
}

std::size_t Architecture::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const LayerSpec& l : dense) n += l.parameter_count();
  for (const LayerSpec& l : conv) n += l.parameter_count();
  return n;
}

Architecture default_architecture(int beam_count, int channels, int hidden) {
  const int stem = (beam_count + 15) / 16 + 1;
  Architecture a;
  a.input_dim = 2;
  a.dense = {
      {LayerKind::kDense, 2, hidden, 1, 1, 0, Activation::kRelu},
      {LayerKind::kDense, hidden, channels * stem, 1, 1, 0, Activation::kRelu},
  };
  a.reshape_channels = channels;
  a.reshape_length = stem;
  a.conv = {
      {LayerKind::kConvTranspose, channels, channels, 8, 4, 0, Activation::kRelu},
      {LayerKind::kConv, channels, channels, 5, 1, 2, Activation::kRelu},
      {LayerKind::kConvTranspose, channels, channels, 8, 4, 0, Activation::kRelu},
      {LayerKind::kConv, channels, channels, 5, 1, 2, Activation::kRelu},
      {LayerKind::kConv, channels, 1, 1, 1, 0, Activation::kIdentity},
  };
  a.output_length = beam_count;
  return a;
}

// Per-layer buffers for one forward (and optional backward) pass. Index i
// covers dense layers first, then conv layers.
class GenModel::Workspace {
 public:
  std::vector<Mat> input;    // layer input, conv inputs shaped (C, L)
  std::vector<Mat> pre;      // pre-activation
  std::vector<Mat> scratch;  // im2col (conv) or W*x columns (conv transpose)
  Mat output;                // final activation, 1 x L

  // tangent buffers, per layer so their shapes stay fixed between calls
  std::vector<Mat> tangent;
  std::vector<Mat> tangent_scratch;

  // backward temporaries
  Mat grad;
  Mat grad_scratch;
  Mat grad_in;
};

namespace {

struct LayerParams {
  MapC w;
  Eigen::Map<const Vec> b;
};

struct LayerGrads {
  MapM w;
  Eigen::Map<Vec> b;
};

// Conv activations for a batch of nb samples are stored as (C, L * nb):
// sample s owns columns [s * L, (s + 1) * L).

// y = W * im2col(x) (+ b).
void conv_forward(const LayerSpec& l, const LayerParams& p, const Mat& x, int nb, Mat& col, Mat& y,
                  bool with_bias) {
  const int cin = l.in;
  const int lin = static_cast<int>(x.cols()) / nb;
  const int lout = conv_length(l, lin);
  col.setZero(static_cast<Eigen::Index>(l.kernel) * cin, static_cast<Eigen::Index>(lout) * nb);
  for (int s = 0; s < nb; ++s) {
    for (int t = 0; t < lout; ++t) {
      for (int k = 0; k < l.kernel; ++k) {
        const int src = t * l.stride + k - l.padding;
        if (src >= 0 && src < lin) col.block(k * cin, s * lout + t, cin, 1) = x.col(s * lin + src);
      }
    }
  }
  y.noalias() = p.w * col;
  if (with_bias) y.colwise() += p.b;
}

// y = col2im(W * x) (+ b) for a transposed convolution.
void convt_forward(const LayerSpec& l, const LayerParams& p, const Mat& x, int nb, Mat& tmp, Mat& y,
                   bool with_bias) {
  const int cout = l.out;
  const int lin = static_cast<int>(x.cols()) / nb;
  const int lout = conv_length(l, lin);
  tmp.noalias() = p.w * x;
  y.setZero(cout, static_cast<Eigen::Index>(lout) * nb);
  for (int s = 0; s < nb; ++s) {
    for (int i = 0; i < lin; ++i) {
      for (int k = 0; k < l.kernel; ++k) {
        const int dst = i * l.stride + k - l.padding;
        if (dst >= 0 && dst < lout) y.col(s * lout + dst) += tmp.block(k * cout, s * lin + i, cout, 1);
      }
    }
  }
  if (with_bias) y.colwise() += p.b;
}

void linear_forward(const LayerSpec& l, const LayerParams& p, const Mat& x, int nb, Mat& scratch,
                    Mat& y, bool with_bias) {
  switch (l.kind) {
    case LayerKind::kDense:
      y.noalias() = p.w * x;
      if (with_bias) y.colwise() += p.b;
      break;
    case LayerKind::kConv: conv_forward(l, p, x, nb, scratch, y, with_bias); break;
    case LayerKind::kConvTranspose: convt_forward(l, p, x, nb, scratch, y, with_bias); break;
  }
}

}  // namespace

GenModel::GenModel(Architecture arch, std::vector<double> params)
    : arch_(std::move(arch)), params_(std::move(params)) {
  arch_.validate();
  if (params_.size() != arch_.parameter_count()) {
    throw ValidationError("parameter count " + std::to_string(params_.size()) +
                          " does not match architecture (" +
                          std::to_string(arch_.parameter_count()) + ")");
  }
  std::size_t off = 0;
  for (const LayerSpec& l : arch_.dense) {
    offsets_.push_back(off);
    off += l.parameter_count();
  }
  for (const LayerSpec& l : arch_.conv) {
    offsets_.push_back(off);
    off += l.parameter_count();
  }
}

GenModel GenModel::zeros(const Architecture& arch) {
  arch.validate();
  return GenModel(arch, std::vector<double>(arch.parameter_count(), 0.0));
}

void GenModel::WorkspaceDeleter::operator()(Workspace* ws) const noexcept { delete ws; }

GenModel::WorkspacePtr GenModel::make_workspace() const {
  WorkspacePtr ws(new Workspace);
  const std::size_t n = arch_.dense.size() + arch_.conv.size();
  ws->input.resize(n);
  ws->pre.resize(n);
  ws->scratch.resize(n);
  return ws;
}

namespace {

const LayerSpec& layer_at(const Architecture& a, std::size_t i) {
  return i < a.dense.size() ? a.dense[i] : a.conv[i - a.dense.size()];
}

LayerParams params_at(const Architecture& a, std::span<const double> params,
                      const std::vector<std::size_t>& offsets, std::size_t i) {
  const LayerSpec& l = layer_at(a, i);
  const auto [r, c] = weight_shape(l);
  const double* base = params.data() + offsets[i];
  return {MapC(base, r, c), Eigen::Map<const Vec>(base + static_cast<std::ptrdiff_t>(r) * c, l.out)};
}

LayerGrads grads_at(const Architecture& a, std::span<double> grad,
                    const std::vector<std::size_t>& offsets, std::size_t i) {
  const LayerSpec& l = layer_at(a, i);
  const auto [r, c] = weight_shape(l);
  double* base = grad.data() + offsets[i];
  return {MapM(base, r, c), Eigen::Map<Vec>(base + static_cast<std::ptrdiff_t>(r) * c, l.out)};
}

// ReLU'(0) = 0. `m` may hold k tangents per primal column block.
void mask_by_activation(Activation act, const Mat& pre, Mat& m) {
  if (act != Activation::kRelu) return;
  const Eigen::Index pc = pre.cols();
  for (Eigen::Index j = 0; j < m.cols(); j += pc) {
    auto blk = m.middleCols(j, pc);
    blk = (pre.array() > 0.0).select(blk, 0.0);
  }
}

// Primal pass over nb inputs (columns of x); fills ws.input/pre/scratch/output.
void run_forward(const Architecture& a, std::span<const double> params,
                 const std::vector<std::size_t>& offsets, const Mat& x, GenModel::Workspace& ws) {
  const std::size_t nd = a.dense.size();
  const std::size_t n = nd + a.conv.size();
  const int nb = static_cast<int>(x.cols());
  ws.input[0] = x;
  for (std::size_t i = 0; i < n; ++i) {
    const LayerSpec& l = layer_at(a, i);
    linear_forward(l, params_at(a, params, offsets, i), ws.input[i], nb, ws.scratch[i], ws.pre[i],
                   true);
    Mat& next = i + 1 < n ? ws.input[i + 1] : ws.output;
    apply_activation(l.activation, ws.pre[i], next);
    // (C*L, nb) and (C, L*nb) share the same column-major storage.
    if (i + 1 == nd) next.resize(a.reshape_channels, static_cast<Eigen::Index>(a.reshape_length) * nb);
  }
}

// Both tangent directions e_u, e_v pushed through the network linearized at
// the last single-input primal pass. Returns (1, 2L): columns [0, L) for
// e_u and [L, 2L) for e_v.
const Mat& run_tangents(const Architecture& a, std::span<const double> params,
                        const std::vector<std::size_t>& offsets, GenModel::Workspace& ws) {
  const std::size_t nd = a.dense.size();
  const std::size_t n = nd + a.conv.size();
  ws.tangent.resize(n + 1);
  ws.tangent_scratch.resize(n);
  ws.tangent[0] = Mat::Identity(2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const LayerSpec& l = layer_at(a, i);
    Mat& next = ws.tangent[i + 1];
    linear_forward(l, params_at(a, params, offsets, i), ws.tangent[i], 2, ws.tangent_scratch[i],
                   next, false);
    mask_by_activation(l.activation, ws.pre[i], next);
    if (i + 1 == nd) next.resize(a.reshape_channels, static_cast<Eigen::Index>(a.reshape_length) * 2);
  }
  return ws.tangent[n];
}

// Reused across calls so the large per-layer buffers are not reallocated on
// every prediction; buffers adapt to whichever model uses them.
GenModel::Workspace& thread_workspace(const Architecture& a) {
  thread_local GenModel::Workspace ws;
  const std::size_t n = a.dense.size() + a.conv.size();
  ws.input.resize(n);
  ws.pre.resize(n);
  ws.scratch.resize(n);
  return ws;
}

Mat pose_column(const NormPose& x) {
  Mat m(2, 1);
  m << x.u, x.v;
  return m;
}

}  // namespace

NormScan GenModel::forward(const NormPose& x) const {
  Workspace& ws = thread_workspace(arch_);
  run_forward(arch_, params_, offsets_, pose_column(x), ws);
  const int off = arch_.crop_offset();
  NormScan out;
  out.values.assign(ws.output.data() + off, ws.output.data() + off + arch_.output_length);
  return out;
}

GenModel::Evaluation GenModel::evaluate(const NormPose& x) const {
  Workspace& ws = thread_workspace(arch_);
  run_forward(arch_, params_, offsets_, pose_column(x), ws);
  const int off = arch_.crop_offset();
  const int b = arch_.output_length;
  const int len = arch_.conv_output_length();
  Evaluation e;
  e.prediction.assign(ws.output.data() + off, ws.output.data() + off + b);
  const Mat& t = run_tangents(arch_, params_, offsets_, ws);
  e.jacobian.resize(b, 2);
  e.jacobian.col(0) = t.row(0).segment(off, b).transpose();
  e.jacobian.col(1) = t.row(0).segment(len + off, b).transpose();
  return e;
}

Jacobian GenModel::jacobian(const NormPose& x) const { return evaluate(x).jacobian; }

Eigen::MatrixXd GenModel::forward_batch(std::span<const NormPose> xs) const {
  Workspace& ws = thread_workspace(arch_);
  Mat x(2, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t s = 0; s < xs.size(); ++s) x.col(static_cast<Eigen::Index>(s)) << xs[s].u, xs[s].v;
  run_forward(arch_, params_, offsets_, x, ws);
  const int len = arch_.conv_output_length();
  const int off = arch_.crop_offset();
  const int b = arch_.output_length;
  Mat out(b, x.cols());
  for (Eigen::Index s = 0; s < x.cols(); ++s) {
    out.col(s) = ws.output.row(0).segment(s * len + off, b).transpose();
  }
  return out;
}

double GenModel::accumulate_l1_gradient(std::span<const NormPose> xs,
                                        const Eigen::Ref<const Eigen::MatrixXd>& targets,
                                        double weight, std::span<double> grad,
                                        Workspace& ws) const {
  const int b = arch_.output_length;
  const int nb = static_cast<int>(xs.size());
  if (targets.rows() != b || targets.cols() != nb) {
    throw DimensionMismatch("targets must be " + std::to_string(b) + " x " + std::to_string(nb));
  }
  if (grad.size() != params_.size()) throw DimensionMismatch("gradient buffer has wrong size");
  if (nb == 0) return 0.0;
  Mat x(2, nb);
  for (int s = 0; s < nb; ++s) x.col(s) << xs[static_cast<std::size_t>(s)].u, xs[static_cast<std::size_t>(s)].v;
  run_forward(arch_, params_, offsets_, x, ws);

  const int len = arch_.conv_output_length();
  const int off = arch_.crop_offset();
  double loss = 0.0;
  Mat& g = ws.grad;
  g.setZero(1, ws.output.cols());
  for (int s = 0; s < nb; ++s) {
    for (int i = 0; i < b; ++i) {
      const double r = ws.output(0, s * len + off + i) - targets(i, s);
      loss += std::abs(r);
      g(0, s * len + off + i) = r > 0.0 ? weight : (r < 0.0 ? -weight : 0.0);
    }
  }

  const std::size_t nd = arch_.dense.size();
  for (std::size_t i = nd + arch_.conv.size(); i-- > 0;) {
    const LayerSpec& l = layer_at(arch_, i);
    mask_by_activation(l.activation, ws.pre[i], g);  // g is now d/d(pre)
    const LayerParams p = params_at(arch_, params_, offsets_, i);
    LayerGrads gp = grads_at(arch_, grad, offsets_, i);
    gp.b += g.rowwise().sum();
    const Mat& in = ws.input[i];
    const int lin = static_cast<int>(in.cols()) / nb;
    const int lout = static_cast<int>(g.cols()) / nb;
    switch (l.kind) {
      case LayerKind::kDense:
        gp.w.noalias() += g * in.transpose();
        if (i > 0) ws.grad_in.noalias() = p.w.transpose() * g;
        break;
      case LayerKind::kConv: {
        gp.w.noalias() += g * ws.scratch[i].transpose();
        ws.grad_scratch.noalias() = p.w.transpose() * g;
        ws.grad_in.setZero(l.in, in.cols());
        for (int s = 0; s < nb; ++s) {
          for (int t = 0; t < lout; ++t) {
            for (int k = 0; k < l.kernel; ++k) {
              const int src = t * l.stride + k - l.padding;
              if (src >= 0 && src < lin) {
                ws.grad_in.col(s * lin + src) += ws.grad_scratch.block(k * l.in, s * lout + t, l.in, 1);
              }
            }
          }
        }
        break;
      }
      case LayerKind::kConvTranspose: {
        ws.grad_scratch.setZero(static_cast<Eigen::Index>(l.kernel) * l.out, in.cols());
        for (int s = 0; s < nb; ++s) {
          for (int t = 0; t < lin; ++t) {
            for (int k = 0; k < l.kernel; ++k) {
              const int dst = t * l.stride + k - l.padding;
              if (dst >= 0 && dst < lout) {
                ws.grad_scratch.block(k * l.out, s * lin + t, l.out, 1) = g.col(s * lout + dst);
              }
            }
          }
        }
        gp.w.noalias() += ws.grad_scratch * in.transpose();
        ws.grad_in.noalias() = p.w.transpose() * ws.grad_scratch;
        break;
      }
    }
    if (i == 0) break;
    g.swap(ws.grad_in);
    // Undo the reshape: (C, L*nb) back to (C*L, nb).
    if (i == nd) g.resize(static_cast<Eigen::Index>(arch_.reshape_channels) * arch_.reshape_length, nb);
  }
  return loss;
}

double GenModel::accumulate_l1_gradient(const NormPose& x, std::span<const double> target,
                                        double weight, std::span<double> grad,
                                        Workspace& ws) const {
  if (static_cast<int>(target.size()) != arch_.output_length) {
    throw DimensionMismatch("target length " + std::to_string(target.size()) +
                            " != beam count " + std::to_string(arch_.output_length));
  }
  const Eigen::Map<const Mat> t(target.data(), static_cast<Eigen::Index>(target.size()), 1);
  return accumulate_l1_gradient(std::span<const NormPose>(&x, 1), t, weight, grad, ws);
}

GenModel init_model(const Architecture& arch, Rng& rng) {
  GenModel m = GenModel::zeros(arch);
  std::span<double> p = m.mutable_parameters();
  std::size_t off = 0;
  auto fill = [&](const LayerSpec& l) {
    const double fan_in = static_cast<double>(l.in) * l.kernel;
    const double fan_out = static_cast<double>(l.out) * l.kernel;
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    const auto [r, c] = weight_shape(l);
    const std::size_t nw = static_cast<std::size_t>(r) * static_cast<std::size_t>(c);
    for (std::size_t i = 0; i < nw; ++i) p[off + i] = dist(rng);
    off += l.parameter_count();  // biases stay zero
  };
  for (const LayerSpec& l : arch.dense) fill(l);
  for (const LayerSpec& l : arch.conv) fill(l);
  return m;
}

}  // namespace fepl
