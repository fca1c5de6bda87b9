#include "surfcorr/fusion.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "surfcorr/rng.hpp"
#include "surfcorr/tensor_io.hpp"

namespace surfcorr {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw ArgError(message);
}

Eigen::Map<const Eigen::VectorXd> flat(const TokenMap& f) {
  return {f.data.data(), static_cast<Eigen::Index>(f.data.size())};
}

// Token map plus the broadcast latent, the operand every projection convolves.
TokenMap with_latent(const TokenMap& f, const LatentEncoder& encoder) {
  const Eigen::VectorXd latent = encoder.encode(f);
  TokenMap g = f;
  for (int y = 0; y < f.h; ++y)
    for (int x = 0; x < f.w; ++x)
      for (int ch = 0; ch < f.c; ++ch) g.at(y, x, ch) += latent[ch];
  return g;
}

void check_lcp_shapes(const TokenMap& f, const LatentEncoder& encoder,
                      const ConvKernel& kernel) {
  require(f.h >= 1 && f.w >= 1 && f.c >= 1, "token map must be nonempty");
  require(encoder.frozen, "latent encoder must be frozen before projection");
  require(encoder.in_dim() == f.h * f.w * f.c,
          "latent encoder input does not match the token map");
  require(encoder.latent_dim() == f.c,
          "latent dimension must equal the channel count");
  require(kernel.k >= 1 && kernel.k % 2 == 1, "kernel size must be odd");
  require(kernel.c_in == f.c, "kernel input channels do not match the map");
  require(kernel.c_out >= 1, "kernel must have output channels");
}

void check_mha_shapes(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                      const Eigen::MatrixXd& v, int heads,
                      const Eigen::MatrixXd& out_proj) {
  require(q.rows() >= 1 && k.rows() >= 1, "attention needs tokens");
  require(q.cols() == k.cols() && k.cols() == v.cols(),
          "query, key, value widths differ");
  require(k.rows() == v.rows(), "key and value token counts differ");
  require(heads >= 1, "head count must be positive");
  require(q.cols() % heads == 0, "width must be divisible by the head count");
  require(out_proj.rows() == q.cols() && out_proj.cols() == q.cols(),
          "output projection must be square in the token width");
}

// Shared forward pass retaining per-head softmax weights for the backward.
struct MhaForward {
  std::vector<Eigen::MatrixXd> weights;  // per head, nq×nk
  Eigen::MatrixXd concat;                // nq×c, heads side by side
  Eigen::MatrixXd out;                   // nq×c
};

MhaForward mha_forward(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                       const Eigen::MatrixXd& v, int heads,
                       const Eigen::MatrixXd& out_proj) {
  const int c = static_cast<int>(q.cols());
  const int hd = c / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  MhaForward fwd;
  fwd.concat.resize(q.rows(), c);
  for (int h = 0; h < heads; ++h) {
    const auto qh = q.middleCols(h * hd, hd);
    const auto kh = k.middleCols(h * hd, hd);
    const auto vh = v.middleCols(h * hd, hd);
    Eigen::MatrixXd scores = qh * kh.transpose() * scale;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
      const double mx = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - mx).exp();
      scores.row(r) /= scores.row(r).sum();
    }
    fwd.concat.middleCols(h * hd, hd) = scores * vh;
    fwd.weights.push_back(std::move(scores));
  }
  fwd.out = fwd.concat * out_proj;
  return fwd;
}

Eigen::MatrixXd append_row(const Eigen::MatrixXd& m, const Eigen::VectorXd& row) {
  Eigen::MatrixXd out(m.rows() + 1, m.cols());
  out.topRows(m.rows()) = m;
  out.row(m.rows()) = row.transpose();
  return out;
}

ConvKernel random_kernel(int k, int c, Rng& rng) {
  ConvKernel kernel(k, c, c);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k) * k * c);
  for (double& w : kernel.w) w = scale * rng.normal();
  return kernel;
}

}  // namespace

Eigen::VectorXd LatentEncoder::encode(const TokenMap& f) const {
  require(in_dim() == static_cast<int>(f.data.size()),
          "latent encoder input does not match the token map");
  return weight * flat(f);
}

AutoencoderResult train_autoencoder(const std::vector<TokenMap>& maps,
                                    int latent_dim, int steps, double lr,
                                    std::uint64_t seed) {
  require(!maps.empty(), "autoencoder needs at least one token map");
  require(latent_dim >= 1, "latent dimension must be positive");
  require(steps >= 0, "step count must be nonnegative");
  const std::size_t m = maps.front().data.size();
  for (const TokenMap& f : maps) {
    require(f.h == maps.front().h && f.w == maps.front().w && f.c == maps.front().c,
            "token maps must share one shape");
  }

  Eigen::MatrixXd x(m, maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) x.col(i) = flat(maps[i]);

  Rng rng = stage_rng(seed, "autoencoder");
  const double init_scale = 1.0 / std::sqrt(static_cast<double>(m));
  Eigen::MatrixXd w_enc(latent_dim, m), w_dec(m, latent_dim);
  for (Eigen::Index i = 0; i < w_enc.size(); ++i)
    w_enc.data()[i] = init_scale * rng.normal();
  for (Eigen::Index i = 0; i < w_dec.size(); ++i)
    w_dec.data()[i] = init_scale * rng.normal();

  const double norm = 1.0 / (static_cast<double>(m) * maps.size());
  double mse = 0.0;
  for (int step = 0; step <= steps; ++step) {
    const Eigen::MatrixXd z = w_enc * x;
    const Eigen::MatrixXd residual = w_dec * z - x;
    mse = residual.squaredNorm() * norm;
    if (!std::isfinite(mse)) {
      throw ValidationError("autoencoder training diverged");
    }
    if (step == steps) break;
    const Eigen::MatrixXd d_dec = 2.0 * norm * residual * z.transpose();
    const Eigen::MatrixXd d_enc =
        2.0 * norm * w_dec.transpose() * residual * x.transpose();
    w_dec -= lr * d_dec;
    w_enc -= lr * d_enc;
  }

  AutoencoderResult result;
  result.encoder.weight = std::move(w_enc);
  result.encoder.frozen = true;
  result.reconstruction_mse = mse;
  return result;
}

Eigen::MatrixXd lcp_project(const TokenMap& f, const LatentEncoder& encoder,
                            const ConvKernel& kernel) {
  check_lcp_shapes(f, encoder, kernel);
  const TokenMap g = with_latent(f, encoder);
  const int off = kernel.k / 2;

  Eigen::MatrixXd out(static_cast<Eigen::Index>(f.h) * f.w, kernel.c_out);
  for (int y = 0; y < f.h; ++y) {
    for (int x = 0; x < f.w; ++x) {
      for (int co = 0; co < kernel.c_out; ++co) {
        double acc = 0.0;
        for (int ky = 0; ky < kernel.k; ++ky) {
          const int sy = y + ky - off;
          if (sy < 0 || sy >= f.h) continue;
          for (int kx = 0; kx < kernel.k; ++kx) {
            const int sx = x + kx - off;
            if (sx < 0 || sx >= f.w) continue;
            for (int ci = 0; ci < f.c; ++ci) {
              acc += g.at(sy, sx, ci) * kernel.at(ky, kx, ci, co);
            }
          }
        }
        out(static_cast<Eigen::Index>(y) * f.w + x, co) = acc;
      }
    }
  }
  return out;
}

LcpGrads lcp_project_vjp(const TokenMap& f, const LatentEncoder& encoder,
                         const ConvKernel& kernel, const Eigen::MatrixXd& d_out) {
  check_lcp_shapes(f, encoder, kernel);
  require(d_out.rows() == static_cast<Eigen::Index>(f.h) * f.w &&
              d_out.cols() == kernel.c_out,
          "cotangent shape does not match the projection output");
  const TokenMap g = with_latent(f, encoder);
  const int off = kernel.k / 2;

  LcpGrads grads;
  grads.d_input = TokenMap(f.h, f.w, f.c);
  grads.d_kernel = ConvKernel(kernel.k, kernel.c_in, kernel.c_out);
  TokenMap d_g(f.h, f.w, f.c);

  for (int y = 0; y < f.h; ++y) {
    for (int x = 0; x < f.w; ++x) {
      for (int co = 0; co < kernel.c_out; ++co) {
        const double up = d_out(static_cast<Eigen::Index>(y) * f.w + x, co);
        if (up == 0.0) continue;
        for (int ky = 0; ky < kernel.k; ++ky) {
          const int sy = y + ky - off;
          if (sy < 0 || sy >= f.h) continue;
          for (int kx = 0; kx < kernel.k; ++kx) {
            const int sx = x + kx - off;
            if (sx < 0 || sx >= f.w) continue;
            for (int ci = 0; ci < f.c; ++ci) {
              d_g.at(sy, sx, ci) += up * kernel.at(ky, kx, ci, co);
              grads.d_kernel.at(ky, kx, ci, co) += up * g.at(sy, sx, ci);
            }
          }
        }
      }
    }
  }

  // G = F + broadcast(W·flat(F)): the broadcast folds the per-token cotangents
  // back through the encoder into every input element.
  Eigen::VectorXd d_latent = Eigen::VectorXd::Zero(f.c);
  for (int y = 0; y < f.h; ++y)
    for (int x = 0; x < f.w; ++x)
      for (int ch = 0; ch < f.c; ++ch) d_latent[ch] += d_g.at(y, x, ch);
  const Eigen::VectorXd d_flat = encoder.weight.transpose() * d_latent;
  for (std::size_t i = 0; i < grads.d_input.data.size(); ++i) {
    grads.d_input.data[i] = d_g.data[i] + d_flat[static_cast<Eigen::Index>(i)];
  }
  return grads;
}

Eigen::MatrixXd mha(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                    const Eigen::MatrixXd& v, int heads,
                    const Eigen::MatrixXd& out_proj) {
  check_mha_shapes(q, k, v, heads, out_proj);
  return mha_forward(q, k, v, heads, out_proj).out;
}

MhaGrads mha_vjp(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                 const Eigen::MatrixXd& v, int heads,
                 const Eigen::MatrixXd& out_proj, const Eigen::MatrixXd& d_out) {
  check_mha_shapes(q, k, v, heads, out_proj);
  require(d_out.rows() == q.rows() && d_out.cols() == q.cols(),
          "cotangent shape does not match the attention output");
  const MhaForward fwd = mha_forward(q, k, v, heads, out_proj);
  const int c = static_cast<int>(q.cols());
  const int hd = c / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  MhaGrads grads;
  grads.d_out_proj = fwd.concat.transpose() * d_out;
  const Eigen::MatrixXd d_concat = d_out * out_proj.transpose();
  grads.d_q = Eigen::MatrixXd::Zero(q.rows(), c);
  grads.d_k = Eigen::MatrixXd::Zero(k.rows(), c);
  grads.d_v = Eigen::MatrixXd::Zero(v.rows(), c);

  for (int h = 0; h < heads; ++h) {
    const auto qh = q.middleCols(h * hd, hd);
    const auto kh = k.middleCols(h * hd, hd);
    const auto vh = v.middleCols(h * hd, hd);
    const Eigen::MatrixXd& a = fwd.weights[h];
    const auto d_h = d_concat.middleCols(h * hd, hd);

    const Eigen::MatrixXd d_a = d_h * vh.transpose();
    grads.d_v.middleCols(h * hd, hd) = a.transpose() * d_h;

    // Row-wise softmax backward: dS = A ⊙ (dA − rowsum(dA ⊙ A)).
    Eigen::MatrixXd d_s(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const double dot = d_a.row(r).dot(a.row(r));
      d_s.row(r) = a.row(r).cwiseProduct(d_a.row(r).array().matrix() -
                                         Eigen::RowVectorXd::Constant(a.cols(), dot));
    }
    grads.d_q.middleCols(h * hd, hd) = d_s * kh * scale;
    grads.d_k.middleCols(h * hd, hd) = d_s.transpose() * qh * scale;
  }
  return grads;
}

void FusionParams::validate(int c) const {
  require(heads >= 1, "head count must be positive");
  require(c % heads == 0, "channels must divide evenly across heads");
  require(encoder_g.frozen && encoder_s.frozen, "latent encoders must be frozen");
  require(encoder_g.latent_dim() == c && encoder_s.latent_dim() == c,
          "latent dimension must equal the channel count");
  for (const ConvKernel* kernel : {&q_g, &k_g, &v_g, &q_s, &k_s, &v_s}) {
    require(kernel->k >= 1 && kernel->k % 2 == 1, "kernel size must be odd");
    require(kernel->c_in == c && kernel->c_out == c,
            "kernels must map the channel count to itself");
  }
  require(out_proj_g.rows() == c && out_proj_g.cols() == c &&
              out_proj_s.rows() == c && out_proj_s.cols() == c,
          "output projections must be square in the channel count");
  require(cls_g.size() == c && cls_s.size() == c,
          "class tokens must have one entry per channel");
}

FusionParams init_fusion_params(int h, int w, int c, int heads,
                                std::uint64_t seed, int kernel_size) {
  require(h >= 1 && w >= 1 && c >= 1, "token map shape must be positive");
  require(heads >= 1 && c % heads == 0, "channels must divide evenly across heads");
  require(kernel_size >= 1 && kernel_size % 2 == 1, "kernel size must be odd");

  Rng rng = stage_rng(seed, "fusion-init");
  FusionParams params;
  params.heads = heads;
  const int in_dim = h * w * c;
  const double enc_scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (LatentEncoder* enc : {&params.encoder_g, &params.encoder_s}) {
    enc->weight.resize(c, in_dim);
    for (Eigen::Index i = 0; i < enc->weight.size(); ++i)
      enc->weight.data()[i] = enc_scale * rng.normal();
    enc->frozen = true;
  }
  for (ConvKernel* kernel :
       {&params.q_g, &params.k_g, &params.v_g, &params.q_s, &params.k_s, &params.v_s}) {
    *kernel = random_kernel(kernel_size, c, rng);
  }
  const double proj_scale = 1.0 / std::sqrt(static_cast<double>(c));
  params.out_proj_g.resize(c, c);
  params.out_proj_s.resize(c, c);
  for (Eigen::MatrixXd* proj : {&params.out_proj_g, &params.out_proj_s}) {
    for (Eigen::Index i = 0; i < proj->size(); ++i)
      proj->data()[i] = proj_scale * rng.normal();
  }
  params.cls_g.resize(c);
  params.cls_s.resize(c);
  for (Eigen::Index i = 0; i < c; ++i) params.cls_g[i] = rng.normal();
  for (Eigen::Index i = 0; i < c; ++i) params.cls_s[i] = rng.normal();
  return params;
}

FusionOutput cross_fuse(const TokenMap& fg, const TokenMap& fs,
                        const FusionParams& params) {
  require(fg.h == fs.h && fg.w == fs.w && fg.c == fs.c,
          "modality token maps must share one shape");
  params.validate(fg.c);

  const Eigen::MatrixXd q_g = append_row(lcp_project(fg, params.encoder_g, params.q_g),
                                         params.cls_g);
  const Eigen::MatrixXd k_s = lcp_project(fs, params.encoder_s, params.k_s);
  const Eigen::MatrixXd v_s = lcp_project(fs, params.encoder_s, params.v_s);
  const Eigen::MatrixXd q_s = append_row(lcp_project(fs, params.encoder_s, params.q_s),
                                         params.cls_s);
  const Eigen::MatrixXd k_g = lcp_project(fg, params.encoder_g, params.k_g);
  const Eigen::MatrixXd v_g = lcp_project(fg, params.encoder_g, params.v_g);

  const Eigen::MatrixXd attn_g = mha(q_g, k_s, v_s, params.heads, params.out_proj_g);
  const Eigen::MatrixXd attn_s = mha(q_s, k_g, v_g, params.heads, params.out_proj_s);

  const Eigen::Index tokens = static_cast<Eigen::Index>(fg.h) * fg.w;
  FusionOutput out;
  out.fg = fg;
  out.fs = fs;
  for (int y = 0; y < fg.h; ++y)
    for (int x = 0; x < fg.w; ++x)
      for (int ch = 0; ch < fg.c; ++ch) {
        out.fg.at(y, x, ch) += attn_g(static_cast<Eigen::Index>(y) * fg.w + x, ch);
        out.fs.at(y, x, ch) += attn_s(static_cast<Eigen::Index>(y) * fg.w + x, ch);
      }
  out.cls_g = params.cls_g + attn_g.row(tokens).transpose();
  out.cls_s = params.cls_s + attn_s.row(tokens).transpose();
  return out;
}

FusionGrads cross_fuse_vjp(const TokenMap& fg, const TokenMap& fs,
                           const FusionParams& params, const FusionOutput& d_out) {
  require(fg.h == fs.h && fg.w == fs.w && fg.c == fs.c,
          "modality token maps must share one shape");
  params.validate(fg.c);
  require(d_out.fg.h == fg.h && d_out.fg.w == fg.w && d_out.fg.c == fg.c &&
              d_out.fs.h == fg.h && d_out.fs.w == fg.w && d_out.fs.c == fg.c &&
              d_out.cls_g.size() == fg.c && d_out.cls_s.size() == fg.c,
          "cotangent shapes do not match the fusion output");

  const Eigen::MatrixXd q_g_seq = lcp_project(fg, params.encoder_g, params.q_g);
  const Eigen::MatrixXd k_s = lcp_project(fs, params.encoder_s, params.k_s);
  const Eigen::MatrixXd v_s = lcp_project(fs, params.encoder_s, params.v_s);
  const Eigen::MatrixXd q_s_seq = lcp_project(fs, params.encoder_s, params.q_s);
  const Eigen::MatrixXd k_g = lcp_project(fg, params.encoder_g, params.k_g);
  const Eigen::MatrixXd v_g = lcp_project(fg, params.encoder_g, params.v_g);

  const Eigen::MatrixXd q_g = append_row(q_g_seq, params.cls_g);
  const Eigen::MatrixXd q_s = append_row(q_s_seq, params.cls_s);

  const Eigen::Index tokens = static_cast<Eigen::Index>(fg.h) * fg.w;
  const int c = fg.c;

  // Residual structure: the attention cotangent is the map cotangent with the
  // class-token row appended.
  Eigen::MatrixXd d_attn_g(tokens + 1, c), d_attn_s(tokens + 1, c);
  for (int y = 0; y < fg.h; ++y)
    for (int x = 0; x < fg.w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        d_attn_g(static_cast<Eigen::Index>(y) * fg.w + x, ch) = d_out.fg.at(y, x, ch);
        d_attn_s(static_cast<Eigen::Index>(y) * fg.w + x, ch) = d_out.fs.at(y, x, ch);
      }
  d_attn_g.row(tokens) = d_out.cls_g.transpose();
  d_attn_s.row(tokens) = d_out.cls_s.transpose();

  const MhaGrads mg = mha_vjp(q_g, k_s, v_s, params.heads, params.out_proj_g, d_attn_g);
  const MhaGrads ms = mha_vjp(q_s, k_g, v_g, params.heads, params.out_proj_s, d_attn_s);

  FusionGrads grads;
  grads.d_out_proj_g = mg.d_out_proj;
  grads.d_out_proj_s = ms.d_out_proj;
  grads.d_cls_g = d_out.cls_g + mg.d_q.row(tokens).transpose();
  grads.d_cls_s = d_out.cls_s + ms.d_q.row(tokens).transpose();

  const LcpGrads g_q = lcp_project_vjp(fg, params.encoder_g, params.q_g,
                                       mg.d_q.topRows(tokens));
  const LcpGrads g_k = lcp_project_vjp(fg, params.encoder_g, params.k_g, ms.d_k);
  const LcpGrads g_v = lcp_project_vjp(fg, params.encoder_g, params.v_g, ms.d_v);
  const LcpGrads s_q = lcp_project_vjp(fs, params.encoder_s, params.q_s,
                                       ms.d_q.topRows(tokens));
  const LcpGrads s_k = lcp_project_vjp(fs, params.encoder_s, params.k_s, mg.d_k);
  const LcpGrads s_v = lcp_project_vjp(fs, params.encoder_s, params.v_s, mg.d_v);

  grads.d_q_g = g_q.d_kernel;
  grads.d_k_g = g_k.d_kernel;
  grads.d_v_g = g_v.d_kernel;
  grads.d_q_s = s_q.d_kernel;
  grads.d_k_s = s_k.d_kernel;
  grads.d_v_s = s_v.d_kernel;

  grads.d_fg = TokenMap(fg.h, fg.w, fg.c);
  grads.d_fs = TokenMap(fg.h, fg.w, fg.c);
  for (std::size_t i = 0; i < grads.d_fg.data.size(); ++i) {
    grads.d_fg.data[i] = d_out.fg.data[i] + g_q.d_input.data[i] +
                         g_k.d_input.data[i] + g_v.d_input.data[i];
    grads.d_fs.data[i] = d_out.fs.data[i] + s_q.d_input.data[i] +
                         s_k.d_input.data[i] + s_v.d_input.data[i];
  }
  return grads;
}

namespace {

NamedTensor kernel_tensor(const std::string& name, const ConvKernel& kernel) {
  NamedTensor t;
  t.name = name;
  t.shape = {static_cast<std::uint32_t>(kernel.k), static_cast<std::uint32_t>(kernel.k),
             static_cast<std::uint32_t>(kernel.c_in),
             static_cast<std::uint32_t>(kernel.c_out)};
  t.values = kernel.w;
  return t;
}

ConvKernel kernel_from(const NamedTensor& t) {
  if (t.shape.size() != 4 || t.shape[0] != t.shape[1]) {
    throw ParseError("checkpoint kernel '" + t.name + "' has a bad shape");
  }
  ConvKernel kernel(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[2]),
                    static_cast<int>(t.shape[3]));
  kernel.w = t.values;
  return kernel;
}

NamedTensor matrix_tensor(const std::string& name, const Eigen::MatrixXd& m) {
  NamedTensor t;
  t.name = name;
  t.shape = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  t.values.resize(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index col = 0; col < m.cols(); ++col)
      t.values[static_cast<std::size_t>(r) * m.cols() + col] = m(r, col);
  return t;
}

Eigen::MatrixXd matrix_from(const NamedTensor& t) {
  if (t.shape.size() != 2) {
    throw ParseError("checkpoint matrix '" + t.name + "' has a bad shape");
  }
  Eigen::MatrixXd m(t.shape[0], t.shape[1]);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index col = 0; col < m.cols(); ++col)
      m(r, col) = t.values[static_cast<std::size_t>(r) * m.cols() + col];
  return m;
}

NamedTensor vector_tensor(const std::string& name, const Eigen::VectorXd& v) {
  NamedTensor t;
  t.name = name;
  t.shape = {static_cast<std::uint32_t>(v.size())};
  t.values.assign(v.data(), v.data() + v.size());
  return t;
}

Eigen::VectorXd vector_from(const NamedTensor& t) {
  if (t.shape.size() != 1) {
    throw ParseError("checkpoint vector '" + t.name + "' has a bad shape");
  }
  return Eigen::Map<const Eigen::VectorXd>(t.values.data(),
                                           static_cast<Eigen::Index>(t.values.size()));
}

}  // namespace

void save_fusion_params(const FusionParams& params, const std::string& path) {
  std::vector<NamedTensor> tensors;
  tensors.push_back(matrix_tensor("encoder_g", params.encoder_g.weight));
  tensors.push_back(matrix_tensor("encoder_s", params.encoder_s.weight));
  tensors.push_back(kernel_tensor("q_g", params.q_g));
  tensors.push_back(kernel_tensor("k_g", params.k_g));
  tensors.push_back(kernel_tensor("v_g", params.v_g));
  tensors.push_back(kernel_tensor("q_s", params.q_s));
  tensors.push_back(kernel_tensor("k_s", params.k_s));
  tensors.push_back(kernel_tensor("v_s", params.v_s));
  tensors.push_back(matrix_tensor("out_proj_g", params.out_proj_g));
  tensors.push_back(matrix_tensor("out_proj_s", params.out_proj_s));
  tensors.push_back(vector_tensor("cls_g", params.cls_g));
  tensors.push_back(vector_tensor("cls_s", params.cls_s));
  NamedTensor heads;
  heads.name = "heads";
  heads.shape = {1};
  heads.values = {static_cast<double>(params.heads)};
  tensors.push_back(std::move(heads));
  save_tensors(tensors, path);
}

FusionParams load_fusion_params(const std::string& path) {
  const std::vector<NamedTensor> tensors = load_tensors(path);
  FusionParams params;
  params.encoder_g.weight = matrix_from(find_tensor(tensors, "encoder_g"));
  params.encoder_s.weight = matrix_from(find_tensor(tensors, "encoder_s"));
  params.encoder_g.frozen = true;
  params.encoder_s.frozen = true;
  params.q_g = kernel_from(find_tensor(tensors, "q_g"));
  params.k_g = kernel_from(find_tensor(tensors, "k_g"));
  params.v_g = kernel_from(find_tensor(tensors, "v_g"));
  params.q_s = kernel_from(find_tensor(tensors, "q_s"));
  params.k_s = kernel_from(find_tensor(tensors, "k_s"));
  params.v_s = kernel_from(find_tensor(tensors, "v_s"));
  params.out_proj_g = matrix_from(find_tensor(tensors, "out_proj_g"));
  params.out_proj_s = matrix_from(find_tensor(tensors, "out_proj_s"));
  params.cls_g = vector_from(find_tensor(tensors, "cls_g"));
  params.cls_s = vector_from(find_tensor(tensors, "cls_s"));
  const NamedTensor& heads = find_tensor(tensors, "heads");
  if (heads.values.size() != 1) throw ParseError("checkpoint head count malformed");
  params.heads = static_cast<int>(heads.values[0]);
  return params;
}

}  // namespace surfcorr
