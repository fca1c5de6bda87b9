#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "surfcorr/errors.hpp"

namespace surfcorr {

// h×w×c feature grid, channel-minor: ((y*w + x)*c + ch).
struct TokenMap {
  int h = 0, w = 0, c = 0;
  std::vector<double> data;

  TokenMap() = default;
  TokenMap(int h_, int w_, int c_)
      : h(h_), w(w_), c(c_), data(static_cast<std::size_t>(h_) * w_ * c_, 0.0) {}

  double& at(int y, int x, int ch) {
    return data[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }
  double at(int y, int x, int ch) const {
    return data[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }
};

// Frozen linear encoder mapping a flattened token map (h·w·c) to a c-vector.
struct LatentEncoder {
  Eigen::MatrixXd weight;  // latent_dim × in_dim
  bool frozen = false;

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int latent_dim() const { return static_cast<int>(weight.rows()); }
  Eigen::VectorXd encode(const TokenMap& f) const;
};

// k×k×c_in×c_out convolution weights, laid out ((ky*k + kx)*c_in + ci)*c_out + co.
struct ConvKernel {
  int k = 0, c_in = 0, c_out = 0;
  std::vector<double> w;

  ConvKernel() = default;
  ConvKernel(int k_, int c_in_, int c_out_)
      : k(k_), c_in(c_in_), c_out(c_out_),
        w(static_cast<std::size_t>(k_) * k_ * c_in_ * c_out_, 0.0) {}
  double& at(int ky, int kx, int ci, int co) {
    return w[((static_cast<std::size_t>(ky) * k + kx) * c_in + ci) * c_out + co];
  }
  double at(int ky, int kx, int ci, int co) const {
    return w[((static_cast<std::size_t>(ky) * k + kx) * c_in + ci) * c_out + co];
  }
};

struct AutoencoderResult {
  LatentEncoder encoder;
  double reconstruction_mse = 0.0;
};

// Linear encoder/decoder trained by gradient descent on reconstruction MSE;
// the decoder is discarded and the encoder returned frozen.
AutoencoderResult train_autoencoder(const std::vector<TokenMap>& maps,
                                    int latent_dim, int steps, double lr,
                                    std::uint64_t seed);

// Latent convolutional projection: the encoder latent is added to every token
// and a 'same'-padded convolution is applied; the result is flattened
// row-major to an (h·w)×c sequence.
Eigen::MatrixXd lcp_project(const TokenMap& f, const LatentEncoder& encoder,
                            const ConvKernel& kernel);

struct LcpGrads {
  TokenMap d_input;
  ConvKernel d_kernel;
};
LcpGrads lcp_project_vjp(const TokenMap& f, const LatentEncoder& encoder,
                         const ConvKernel& kernel, const Eigen::MatrixXd& d_out);

// Multi-head scaled dot-product attention over token sequences (rows are
// tokens), heads concatenated then right-multiplied by out_proj.
Eigen::MatrixXd mha(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                    const Eigen::MatrixXd& v, int heads,
                    const Eigen::MatrixXd& out_proj);

struct MhaGrads {
  Eigen::MatrixXd d_q, d_k, d_v, d_out_proj;
};
MhaGrads mha_vjp(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                 const Eigen::MatrixXd& v, int heads,
                 const Eigen::MatrixXd& out_proj, const Eigen::MatrixXd& d_out);

// Cross-modality fusion parameters: per-modality LCP kernels for Q/K/V,
// per-direction output projections, and one learnable class token per
// modality.
struct FusionParams {
  LatentEncoder encoder_g, encoder_s;
  ConvKernel q_g, k_g, v_g;
  ConvKernel q_s, k_s, v_s;
  int heads = 4;
  Eigen::MatrixXd out_proj_g, out_proj_s;  // c×c
  Eigen::VectorXd cls_g, cls_s;            // c

  void validate(int c) const;
};

// Seeded initialization at a given token-map shape (kernels 3×3 by default).
FusionParams init_fusion_params(int h, int w, int c, int heads,
                                std::uint64_t seed, int kernel_size = 3);

struct FusionOutput {
  TokenMap fg, fs;
  Eigen::VectorXd cls_g, cls_s;
};

// Bidirectional cross-attention with residual addition; class tokens join
// each modality's query sequence, receive the same residual update, and are
// stripped before the map is reshaped back. Both directions read the
// original inputs.
FusionOutput cross_fuse(const TokenMap& fg, const TokenMap& fs,
                        const FusionParams& params);

struct FusionGrads {
  TokenMap d_fg, d_fs;
  ConvKernel d_q_g, d_k_g, d_v_g, d_q_s, d_k_s, d_v_s;
  Eigen::MatrixXd d_out_proj_g, d_out_proj_s;
  Eigen::VectorXd d_cls_g, d_cls_s;
};
FusionGrads cross_fuse_vjp(const TokenMap& fg, const TokenMap& fs,
                           const FusionParams& params,
                           const FusionOutput& d_out);

// Fusion parameter checkpoints use the named-tensor container (tensor_io).
void save_fusion_params(const FusionParams& params, const std::string& path);
FusionParams load_fusion_params(const std::string& path);

}  // namespace surfcorr
