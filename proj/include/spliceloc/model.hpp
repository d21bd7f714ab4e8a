// ----------------------------------------------------------------------------
// Copyright 2026 The spliceloc Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spliceloc/features.hpp"
#include "spliceloc/tensor.hpp"
#include "spliceloc/vocab.hpp"

namespace spliceloc {

struct ModelConfig {
  std::size_t d_model = 256;
  std::size_t n_heads = 8;
  std::size_t n_encoder_layers = 5;
  std::size_t n_decoder_layers = 5;
  std::size_t d_ff = 512;
  std::size_t input_width = kFeatureWidth;
  std::size_t vocab = SpliceVocab::kSize;
  double dropout = 0.1;
  std::size_t max_src_len = kMaxFrames;
  std::size_t max_tgt_len = 8;

  void validate() const;
  /// Named fields in a fixed order (checkpoint config block).
  std::vector<std::pair<std::string, double>> fields() const;
  static ModelConfig from_fields(const std::map<std::string, double>& fields);
  bool operator==(const ModelConfig&) const = default;
};

/// Padded mini-batch. Source frames beyond src_lengths[b] and target slots
/// holding <pad> are masked out.
struct Batch {
  std::size_t size = 0;
  std::size_t src_len = 0;
  std::size_t tgt_len = 0;
  std::size_t width = 0;
  std::vector<float> src;  // size x src_len x width
  std::vector<std::size_t> src_lengths;
  std::vector<int> tgt_in;   // size x tgt_len, starts with <bos>
  std::vector<int> tgt_out;  // size x tgt_len, shifted by one, <pad>-filled
};

/// Teacher-forcing batch: decoder input is seq[0..n-2], target is seq[1..n-1].
Batch make_batch(const std::vector<const FeatureStack*>& features, const std::vector<TokenSeq>& targets);

/// Inference batch of one sample with the given decoder prefix.
Batch make_single(const FeatureStack& features, const std::vector<int>& prefix);

/// PE[t, 2i] = sin(t / 10000^(2i/d)), PE[t, 2i+1] = cos(same); len x d, row-major.
std::vector<double> positional_encoding(std::size_t len, std::size_t d_model);

template <typename T>
struct Linear {
  ad::Tensor<T> weight;  // [in, out]
  ad::Tensor<T> bias;    // [out]
  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const;
};

template <typename T>
struct AttentionWeights {
  Linear<T> q, k, v, o;
};

/// softmax(q k^T / sqrt(d_k) + mask) v over the last two axes. `mask` may be
/// undefined; otherwise it broadcasts against the score tensor.
template <typename T>
ad::Tensor<T> attention(const ad::Tensor<T>& q, const ad::Tensor<T>& k, const ad::Tensor<T>& v,
                        const ad::Tensor<T>& mask = {}, T dropout = T(0), Rng* rng = nullptr, bool training = false);

/// x_q [B, Tq, d], x_kv [B, Tk, d] -> [B, Tq, d] using `heads` heads.
template <typename T>
ad::Tensor<T> multi_head(const ad::Tensor<T>& x_q, const ad::Tensor<T>& x_kv, const AttentionWeights<T>& w,
                         std::size_t heads, const ad::Tensor<T>& mask = {}, T dropout = T(0), Rng* rng = nullptr,
                         bool training = false);

/// Post-norm Transformer encoder-decoder over feature frames and splice tokens.
template <typename T>
class Transformer {
 public:
  Transformer(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<std::pair<std::string, ad::Tensor<T>>>& parameters() noexcept { return params_; }
  const std::vector<std::pair<std::string, ad::Tensor<T>>>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;

  /// Logits [B, tgt_len, vocab].
  ad::Tensor<T> forward(const Batch& batch, bool training = false, Rng* dropout_rng = nullptr) const;
  /// Mean token cross-entropy over non-pad targets.
  ad::Tensor<T> loss(const Batch& batch, bool training = false, Rng* dropout_rng = nullptr) const;

  struct Memory {
    ad::Tensor<T> states;  // [1, S, d]
    ad::Tensor<T> mask;    // [1, 1, 1, S]
  };
  Memory encode(const FeatureStack& features) const;
  /// Log-probabilities of the token following `prefix`.
  std::vector<double> next_log_probs(const Memory& memory, const std::vector<int>& prefix) const;

 private:
  struct EncoderLayer {
    AttentionWeights<T> self_attn;
    Linear<T> ff1, ff2;
    ad::Tensor<T> ln1_g, ln1_b, ln2_g, ln2_b;
  };
  struct DecoderLayer {
    AttentionWeights<T> self_attn, cross_attn;
    Linear<T> ff1, ff2;
    ad::Tensor<T> ln1_g, ln1_b, ln2_g, ln2_b, ln3_g, ln3_b;
  };

  Linear<T> make_linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  AttentionWeights<T> make_attention(const std::string& name, Rng& rng);
  void make_norm(const std::string& name, ad::Tensor<T>& gain, ad::Tensor<T>& bias);

  ad::Tensor<T> encode_batch(const Batch& batch, const ad::Tensor<T>& src_mask, bool training, Rng* rng) const;
  ad::Tensor<T> decode_batch(const Batch& batch, const ad::Tensor<T>& memory, const ad::Tensor<T>& src_mask,
                             bool training, Rng* rng) const;
  ad::Tensor<T> feed_forward(const ad::Tensor<T>& x, const Linear<T>& ff1, const Linear<T>& ff2, bool training,
                             Rng* rng) const;
  ad::Tensor<T> drop(const ad::Tensor<T>& x, bool training, Rng* rng) const;

  ModelConfig config_;
  std::vector<std::pair<std::string, ad::Tensor<T>>> params_;
  Linear<T> input_;
  ad::Tensor<T> embedding_;
  std::vector<EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;
  ad::Tensor<T> enc_norm_g_, enc_norm_b_, dec_norm_g_, dec_norm_b_;
  Linear<T> output_;
};

/// Copies parameter values between instantiations with identical configs.
template <typename To, typename From>
void copy_parameters(const Transformer<From>& from, Transformer<To>& to);

}  // namespace spliceloc
