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

#include "spliceloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spliceloc/error.hpp"

namespace spliceloc {

using ad::Shape;
using ad::Tensor;

void ModelConfig::validate() const {
  require(d_model > 0 && n_heads > 0 && d_ff > 0 && input_width > 0 && vocab > 0, "model: extents must be positive");
  require(d_model % n_heads == 0, "model: d_model must be divisible by n_heads");
  require(n_encoder_layers > 0 && n_decoder_layers > 0, "model: at least one encoder and one decoder layer");
  require(dropout >= 0.0 && dropout < 1.0, "model: dropout must lie in [0,1)");
  require(max_src_len > 0 && max_tgt_len >= 3, "model: max_tgt_len must leave room for <bos>, a token and <eos>");
  require(vocab == static_cast<std::size_t>(SpliceVocab::kSize), "model: vocabulary size must be 93");
}

std::vector<std::pair<std::string, double>> ModelConfig::fields() const {
  return {{"d_model", double(d_model)},
          {"n_heads", double(n_heads)},
          {"n_encoder_layers", double(n_encoder_layers)},
          {"n_decoder_layers", double(n_decoder_layers)},
          {"d_ff", double(d_ff)},
          {"input_width", double(input_width)},
          {"vocab", double(vocab)},
          {"dropout", dropout},
          {"max_src_len", double(max_src_len)},
          {"max_tgt_len", double(max_tgt_len)}};
}

ModelConfig ModelConfig::from_fields(const std::map<std::string, double>& f) {
  ModelConfig c;
  auto size = [&](const char* key, std::size_t& out) {
    const auto it = f.find(key);
    if (it == f.end()) fail(ErrorKind::Checkpoint, std::string("model config lacks '") + key + "'");
    if (!(it->second >= 0.0) || it->second != std::floor(it->second))
      fail(ErrorKind::Checkpoint, std::string("model config field '") + key + "' is not a count");
    out = static_cast<std::size_t>(it->second);
  };
  size("d_model", c.d_model);
  size("n_heads", c.n_heads);
  size("n_encoder_layers", c.n_encoder_layers);
  size("n_decoder_layers", c.n_decoder_layers);
  size("d_ff", c.d_ff);
  size("input_width", c.input_width);
  size("vocab", c.vocab);
  size("max_src_len", c.max_src_len);
  size("max_tgt_len", c.max_tgt_len);
  const auto it = f.find("dropout");
  if (it == f.end()) fail(ErrorKind::Checkpoint, "model config lacks 'dropout'");
  c.dropout = it->second;
  return c;
}

Batch make_batch(const std::vector<const FeatureStack*>& features, const std::vector<TokenSeq>& targets) {
  require(!features.empty(), "make_batch: empty batch");
  require(targets.empty() || targets.size() == features.size(), "make_batch: one target per sample");
  Batch b;
  b.size = features.size();
  b.width = features[0]->width;
  for (const auto* f : features) {
    require(f->width == b.width, "make_batch: mixed feature widths");
    require(f->frames > 0, "make_batch: empty feature stack");
    b.src_len = std::max(b.src_len, f->frames);
  }
  for (const auto& t : targets) {
    require(t.indices.size() >= 2 && t.indices.front() == SpliceVocab::kBos, "make_batch: target must start with <bos>");
    b.tgt_len = std::max(b.tgt_len, t.indices.size() - 1);
  }
  b.src.assign(b.size * b.src_len * b.width, 0.0f);
  for (std::size_t i = 0; i < b.size; ++i) {
    std::copy(features[i]->data.begin(), features[i]->data.end(), b.src.begin() + static_cast<long>(i * b.src_len * b.width));
    b.src_lengths.push_back(features[i]->frames);
  }
  b.tgt_in.assign(b.size * b.tgt_len, SpliceVocab::kPad);
  b.tgt_out.assign(b.size * b.tgt_len, SpliceVocab::kPad);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& seq = targets[i].indices;
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
      b.tgt_in[i * b.tgt_len + t] = seq[t];
      b.tgt_out[i * b.tgt_len + t] = seq[t + 1];
    }
  }
  return b;
}

Batch make_single(const FeatureStack& features, const std::vector<int>& prefix) {
  Batch b = make_batch({&features}, {});
  b.tgt_len = prefix.size();
  b.tgt_in = prefix;
  b.tgt_out.assign(prefix.size(), SpliceVocab::kPad);
  return b;
}

std::vector<double> positional_encoding(std::size_t len, std::size_t d_model) {
  std::vector<double> pe(len * d_model);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t i = 0; i < d_model; i += 2) {
      const double angle = static_cast<double>(t) / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d_model));
      pe[t * d_model + i] = std::sin(angle);
      if (i + 1 < d_model) pe[t * d_model + i + 1] = std::cos(angle);
    }
  return pe;
}

// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> Linear<T>::operator()(const Tensor<T>& x) const {
  return ad::add(ad::matmul(x, weight), bias);
}

template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, const Tensor<T>& mask, T dropout,
                    Rng* rng, bool training) {
  require(q.rank() >= 2 && k.rank() == q.rank() && v.rank() == q.rank(), "attention: rank mismatch");
  require(q.shape().back() == k.shape().back(),
          "attention: key dimension mismatch " + ad::shape_string(q.shape()) + " vs " + ad::shape_string(k.shape()));
  require(k.shape()[k.rank() - 2] == v.shape()[v.rank() - 2], "attention: keys and values differ in length");
  const T inv = static_cast<T>(1.0 / std::sqrt(static_cast<double>(q.shape().back())));
  auto scores = ad::scale(ad::matmul(q, k, true), inv);
  if (mask.defined()) scores = ad::add(scores, mask);
  auto weights = ad::softmax(scores, -1);
  if (training && dropout > T(0)) weights = ad::dropout(weights, dropout, *rng, true);
  return ad::matmul(weights, v);
}

template <typename T>
Tensor<T> multi_head(const Tensor<T>& x_q, const Tensor<T>& x_kv, const AttentionWeights<T>& w, std::size_t heads,
                     const Tensor<T>& mask, T dropout, Rng* rng, bool training) {
  require(x_q.rank() == 3 && x_kv.rank() == 3, "multi_head: inputs must be [B, T, d]");
  const std::size_t b = x_q.dim(0), tq = x_q.dim(1), tk = x_kv.dim(1), d = w.q.weight.dim(1);
  require(x_kv.dim(0) == b, "multi_head: batch mismatch");
  require(d % heads == 0, "multi_head: model width not divisible by heads");
  const std::size_t dh = d / heads;
  auto split = [&](const Tensor<T>& x, std::size_t len) {
    return ad::permute(ad::reshape(x, {b, len, heads, dh}), {0, 2, 1, 3});
  };
  const auto q = split(w.q(x_q), tq);
  const auto k = split(w.k(x_kv), tk);
  const auto v = split(w.v(x_kv), tk);
  const auto ctx = attention(q, k, v, mask, dropout, rng, training);
  return w.o(ad::reshape(ad::permute(ctx, {0, 2, 1, 3}), {b, tq, d}));
}

// ---------------------------------------------------------------------------

template <typename T>
Linear<T> Transformer<T>::make_linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  const T bound = static_cast<T>(std::sqrt(1.0 / static_cast<double>(in)));
  Linear<T> l{Tensor<T>::uniform({in, out}, bound, rng), Tensor<T>::uniform({out}, bound, rng)};
  params_.emplace_back(name + ".weight", l.weight);
  params_.emplace_back(name + ".bias", l.bias);
  return l;
}

template <typename T>
AttentionWeights<T> Transformer<T>::make_attention(const std::string& name, Rng& rng) {
  const std::size_t d = config_.d_model;
  AttentionWeights<T> w;
  w.q = make_linear(name + ".q", d, d, rng);
  w.k = make_linear(name + ".k", d, d, rng);
  w.v = make_linear(name + ".v", d, d, rng);
  w.o = make_linear(name + ".o", d, d, rng);
  return w;
}

template <typename T>
void Transformer<T>::make_norm(const std::string& name, Tensor<T>& gain, Tensor<T>& bias) {
  gain = Tensor<T>::full({config_.d_model}, T(1), true);
  bias = Tensor<T>::zeros({config_.d_model}, true);
  params_.emplace_back(name + ".gain", gain);
  params_.emplace_back(name + ".bias", bias);
}

template <typename T>
Transformer<T>::Transformer(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const std::size_t d = config_.d_model;
  input_ = make_linear("encoder.input", config_.input_width, d, rng);
  for (std::size_t i = 0; i < config_.n_encoder_layers; ++i) {
    const std::string p = "encoder.layers." + std::to_string(i);
    EncoderLayer l;
    l.self_attn = make_attention(p + ".self_attn", rng);
    l.ff1 = make_linear(p + ".ff1", d, config_.d_ff, rng);
    l.ff2 = make_linear(p + ".ff2", config_.d_ff, d, rng);
    make_norm(p + ".norm1", l.ln1_g, l.ln1_b);
    make_norm(p + ".norm2", l.ln2_g, l.ln2_b);
    encoder_.push_back(std::move(l));
  }
  make_norm("encoder.norm", enc_norm_g_, enc_norm_b_);

  embedding_ = Tensor<T>::uniform({config_.vocab, d}, static_cast<T>(std::sqrt(1.0 / static_cast<double>(d))), rng);
  params_.emplace_back("decoder.embedding", embedding_);
  for (std::size_t i = 0; i < config_.n_decoder_layers; ++i) {
    const std::string p = "decoder.layers." + std::to_string(i);
    DecoderLayer l;
    l.self_attn = make_attention(p + ".self_attn", rng);
    l.cross_attn = make_attention(p + ".cross_attn", rng);
    l.ff1 = make_linear(p + ".ff1", d, config_.d_ff, rng);
    l.ff2 = make_linear(p + ".ff2", config_.d_ff, d, rng);
    make_norm(p + ".norm1", l.ln1_g, l.ln1_b);
    make_norm(p + ".norm2", l.ln2_g, l.ln2_b);
    make_norm(p + ".norm3", l.ln3_g, l.ln3_b);
    decoder_.push_back(std::move(l));
  }
  make_norm("decoder.norm", dec_norm_g_, dec_norm_b_);
  output_ = make_linear("decoder.output", d, config_.vocab, rng);
}

template <typename T>
std::size_t Transformer<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.size();
  return n;
}

template <typename T>
Tensor<T> Transformer<T>::drop(const Tensor<T>& x, bool training, Rng* rng) const {
  if (!training || config_.dropout <= 0.0) return x;
  require(rng != nullptr, "training forward needs a dropout generator");
  return ad::dropout(x, static_cast<T>(config_.dropout), *rng, true);
}

template <typename T>
Tensor<T> Transformer<T>::feed_forward(const Tensor<T>& x, const Linear<T>& ff1, const Linear<T>& ff2, bool training,
                                       Rng* rng) const {
  return ff2(drop(ad::relu(ff1(x)), training, rng));
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <typename T>
Tensor<T> positional_tensor(std::size_t len, std::size_t d) {
  const auto pe = positional_encoding(len, d);
  return Tensor<T>::from({len, d}, std::vector<T>(pe.begin(), pe.end()));
}

}  // namespace

template <typename T>
Tensor<T> Transformer<T>::encode_batch(const Batch& batch, const Tensor<T>& src_mask, bool training, Rng* rng) const {
  require(batch.width == config_.input_width,
          "model expects feature width " + std::to_string(config_.input_width) + ", got " + std::to_string(batch.width));
  require(batch.src_len <= config_.max_src_len, "source longer than max_src_len");
  const std::size_t d = config_.d_model;
  const auto src = Tensor<T>::from({batch.size, batch.src_len, batch.width}, std::vector<T>(batch.src.begin(), batch.src.end()));
  const T dp = static_cast<T>(config_.dropout);
  auto x = drop(ad::add(input_(src), positional_tensor<T>(batch.src_len, d)), training, rng);
  for (const auto& l : encoder_) {
    x = ad::layer_norm(ad::add(x, drop(multi_head(x, x, l.self_attn, config_.n_heads, src_mask, dp, rng, training), training, rng)),
                       l.ln1_g, l.ln1_b);
    x = ad::layer_norm(ad::add(x, drop(feed_forward(x, l.ff1, l.ff2, training, rng), training, rng)), l.ln2_g, l.ln2_b);
  }
  return ad::layer_norm(x, enc_norm_g_, enc_norm_b_);
}

template <typename T>
Tensor<T> Transformer<T>::decode_batch(const Batch& batch, const Tensor<T>& memory, const Tensor<T>& src_mask,
                                       bool training, Rng* rng) const {
  require(batch.tgt_len >= 1 && batch.tgt_len <= config_.max_tgt_len, "target prefix length outside [1, max_tgt_len]");
  const std::size_t b = batch.size, len = batch.tgt_len, d = config_.d_model;
  for (std::size_t i = 0; i < b; ++i)
    require(batch.tgt_in[i * len] == SpliceVocab::kBos, "decoder input must start with <bos>");

  std::vector<T> mask(b * len * len, T(0));
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t q = 0; q < len; ++q)
      for (std::size_t k = 0; k < len; ++k)
        if (k > q || batch.tgt_in[i * len + k] == SpliceVocab::kPad) mask[(i * len + q) * len + k] = static_cast<T>(kNegInf);
  const auto tgt_mask = Tensor<T>::from({b, 1, len, len}, std::move(mask));

  const T dp = static_cast<T>(config_.dropout);
  auto y = ad::scale(ad::embedding(embedding_, batch.tgt_in, {b, len}), static_cast<T>(std::sqrt(static_cast<double>(d))));
  y = drop(ad::add(y, positional_tensor<T>(len, d)), training, rng);
  for (const auto& l : decoder_) {
    y = ad::layer_norm(ad::add(y, drop(multi_head(y, y, l.self_attn, config_.n_heads, tgt_mask, dp, rng, training), training, rng)),
                       l.ln1_g, l.ln1_b);
    y = ad::layer_norm(
        ad::add(y, drop(multi_head(y, memory, l.cross_attn, config_.n_heads, src_mask, dp, rng, training), training, rng)),
        l.ln2_g, l.ln2_b);
    y = ad::layer_norm(ad::add(y, drop(feed_forward(y, l.ff1, l.ff2, training, rng), training, rng)), l.ln3_g, l.ln3_b);
  }
  return output_(ad::layer_norm(y, dec_norm_g_, dec_norm_b_));
}

namespace {

template <typename T>
Tensor<T> source_mask(const Batch& batch) {
  std::vector<T> mask(batch.size * batch.src_len, T(0));
  for (std::size_t i = 0; i < batch.size; ++i)
    for (std::size_t s = batch.src_lengths[i]; s < batch.src_len; ++s) mask[i * batch.src_len + s] = static_cast<T>(kNegInf);
  return Tensor<T>::from({batch.size, 1, 1, batch.src_len}, std::move(mask));
}

}  // namespace

template <typename T>
Tensor<T> Transformer<T>::forward(const Batch& batch, bool training, Rng* dropout_rng) const {
  const auto src_mask = source_mask<T>(batch);
  const auto memory = encode_batch(batch, src_mask, training, dropout_rng);
  return decode_batch(batch, memory, src_mask, training, dropout_rng);
}

template <typename T>
Tensor<T> Transformer<T>::loss(const Batch& batch, bool training, Rng* dropout_rng) const {
  const auto logits = forward(batch, training, dropout_rng);
  return ad::cross_entropy(ad::reshape(logits, {batch.size * batch.tgt_len, config_.vocab}), batch.tgt_out,
                           SpliceVocab::kPad);
}

template <typename T>
typename Transformer<T>::Memory Transformer<T>::encode(const FeatureStack& features) const {
  const Batch b = make_single(features, {SpliceVocab::kBos});
  Memory m;
  m.mask = source_mask<T>(b);
  m.states = encode_batch(b, m.mask, false, nullptr);
  return m;
}

template <typename T>
std::vector<double> Transformer<T>::next_log_probs(const Memory& memory, const std::vector<int>& prefix) const {
  Batch b;
  b.size = 1;
  b.tgt_len = prefix.size();
  b.tgt_in = prefix;
  b.tgt_out.assign(prefix.size(), SpliceVocab::kPad);
  const auto logits = decode_batch(b, memory.states, memory.mask, false, nullptr);
  const std::size_t v = config_.vocab;
  const T* last = logits.data().data() + (prefix.size() - 1) * v;
  double mx = kNegInf;
  for (std::size_t j = 0; j < v; ++j) mx = std::max(mx, static_cast<double>(last[j]));
  double z = 0.0;
  for (std::size_t j = 0; j < v; ++j) z += std::exp(last[j] - mx);
  std::vector<double> out(v);
  for (std::size_t j = 0; j < v; ++j) out[j] = last[j] - mx - std::log(z);
  return out;
}

template <typename To, typename From>
void copy_parameters(const Transformer<From>& from, Transformer<To>& to) {
  require(from.config() == to.config(), "copy_parameters: configs differ");
  auto& dst = to.parameters();
  const auto& src = from.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& s = src[i].second.data();
    auto& d = dst[i].second.data();
    for (std::size_t j = 0; j < s.size(); ++j) d[j] = static_cast<To>(s[j]);
  }
}

#define SPLICELOC_INSTANTIATE(T)                                                                                   \
  template struct Linear<T>;                                                                                       \
  template class Transformer<T>;                                                                                   \
  template Tensor<T> attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T, Rng*,    \
                               bool);                                                                              \
  template Tensor<T> multi_head(const Tensor<T>&, const Tensor<T>&, const AttentionWeights<T>&, std::size_t,       \
                                const Tensor<T>&, T, Rng*, bool);

SPLICELOC_INSTANTIATE(float)
SPLICELOC_INSTANTIATE(double)
#undef SPLICELOC_INSTANTIATE

template void copy_parameters(const Transformer<float>&, Transformer<double>&);
template void copy_parameters(const Transformer<double>&, Transformer<float>&);
template void copy_parameters(const Transformer<float>&, Transformer<float>&);

}  // namespace spliceloc
