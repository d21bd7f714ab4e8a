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

#include "spliceloc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spliceloc/error.hpp"

namespace spliceloc::ad {

std::size_t numel(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

template <typename T>
std::shared_ptr<Node<T>> new_node(Shape shape, std::vector<T> values) {
  auto n = std::make_shared<Node<T>>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  return n;
}

template <typename T>
bool recording(std::initializer_list<const Tensor<T>*> inputs) {
  if (Tape<T>::current() == nullptr) return false;
  for (const auto* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

template <typename T>
Tensor<T> finish(std::shared_ptr<Node<T>> out, bool record, std::function<void(Node<T>&)> backward) {
  if (record) {
    out->requires_grad = true;
    out->backward = std::move(backward);
    Tape<T>::current()->record(out);
  }
  return Tensor<T>(std::move(out));
}

/// C[m,n] (+)= op(A) op(B) with double accumulation. A is [m,k] or, when
/// ta, stored [k,m]; B is [k,n] or, when tb, stored [n,k].
template <typename T>
void gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, const T* A, const T* B, T* C,
          bool accumulate) {
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    if (!tb) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t p = 0; p < k; ++p) {
        const double a = ta ? A[p * m + i] : A[i * k + p];
        if (a == 0.0) continue;
        const T* brow = B + p * n;
        for (std::size_t j = 0; j < n; ++j) acc[j] += a * static_cast<double>(brow[j]);
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        const T* brow = B + j * k;
        double s = 0.0;
        if (!ta) {
          const T* arow = A + i * k;
          for (std::size_t p = 0; p < k; ++p) s += static_cast<double>(arow[p]) * brow[p];
        } else {
          for (std::size_t p = 0; p < k; ++p) s += static_cast<double>(A[p * m + i]) * brow[p];
        }
        acc[j] = s;
      }
    }
    T* crow = C + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = static_cast<T>(accumulate ? crow[j] + acc[j] : acc[j]);
  }
}

std::size_t resolve_axis(int axis, std::size_t rank) {
  const long a = axis < 0 ? static_cast<long>(rank) + axis : axis;
  require(a >= 0 && a < static_cast<long>(rank), "axis out of range");
  return static_cast<std::size_t>(a);
}

/// Index into b for every element of a under right-aligned broadcasting.
std::vector<std::size_t> broadcast_map(const Shape& a, const Shape& b) {
  require(b.size() <= a.size(), "add: cannot broadcast " + shape_string(b) + " to " + shape_string(a));
  const std::size_t offset = a.size() - b.size();
  std::vector<std::size_t> bstride(a.size(), 0);
  std::size_t s = 1;
  for (std::size_t i = b.size(); i-- > 0;) {
    require(b[i] == a[offset + i] || b[i] == 1, "add: cannot broadcast " + shape_string(b) + " to " + shape_string(a));
    bstride[offset + i] = b[i] == 1 ? 0 : s;
    s *= b[i];
  }
  const std::size_t n = numel(a);
  std::vector<std::size_t> map(n);
  std::vector<std::size_t> idx(a.size(), 0);
  std::size_t bi = 0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    map[flat] = bi;
    for (std::size_t d = a.size(); d-- > 0;) {
      ++idx[d];
      bi += bstride[d];
      if (idx[d] < a[d]) break;
      bi -= bstride[d] * idx[d];
      idx[d] = 0;
    }
  }
  return map;
}

}  // namespace

// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> Tensor<T>::zeros(const Shape& shape, bool requires_grad) {
  return full(shape, T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(const Shape& shape, T value, bool requires_grad) {
  auto n = new_node<T>(shape, std::vector<T>(numel(shape), value));
  n->requires_grad = requires_grad;
  return Tensor(n);
}

template <typename T>
Tensor<T> Tensor<T>::from(const Shape& shape, std::vector<T> values, bool requires_grad) {
  require(values.size() == numel(shape), "tensor: " + std::to_string(values.size()) + " values for shape " +
                                             shape_string(shape));
  auto n = new_node<T>(shape, std::move(values));
  n->requires_grad = requires_grad;
  return Tensor(n);
}

template <typename T>
Tensor<T> Tensor<T>::uniform(const Shape& shape, T bound, Rng& rng, bool requires_grad) {
  std::vector<T> v(numel(shape));
  for (auto& x : v) x = static_cast<T>(rng.uniform(-static_cast<double>(bound), static_cast<double>(bound)));
  return from(shape, std::move(v), requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
  require(size() == 1, "item() on a tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

template <typename T>
Tape<T>*& Tape<T>::current_slot() noexcept {
  thread_local Tape<T>* slot = nullptr;
  return slot;
}

template <typename T>
Tape<T>* Tape<T>::current() noexcept {
  return current_slot();
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& root) {
  require(root.defined() && root.size() == 1, "backward: root must be a scalar");
  root.node()->ensure_grad()[0] += T(1);
  visits_ = 0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node<T>& node = **it;
    ++visits_;
    if (node.backward && node.grad.size() == node.value.size()) node.backward(node);
  }
  nodes_.clear();
}

// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  auto mismatch = [&] { return "matmul: incompatible shapes " + shape_string(as) + " and " + shape_string(bs); };
  require(as.size() >= 2 && bs.size() >= 2, mismatch());
  const std::size_t m = as[as.size() - 2], k = as.back();
  const std::size_t kb = transpose_b ? bs.back() : bs[bs.size() - 2];
  const std::size_t n = transpose_b ? bs[bs.size() - 2] : bs.back();
  require(k == kb, mismatch());
  const bool shared = bs.size() == 2;
  if (!shared) require(Shape(as.begin(), as.end() - 2) == Shape(bs.begin(), bs.end() - 2), mismatch());
  const std::size_t batch = numel(Shape(as.begin(), as.end() - 2));

  Shape os(as.begin(), as.end() - 2);
  os.push_back(m);
  os.push_back(n);
  auto out = new_node<T>(os, std::vector<T>(batch * m * n));
  for (std::size_t bi = 0; bi < batch; ++bi)
    gemm(false, transpose_b, m, n, k, a.data().data() + bi * m * k, b.data().data() + (shared ? 0 : bi * k * n),
         out->value.data() + bi * m * n, false);

  auto an = a.node(), bn = b.node();
  return finish<T>(out, recording<T>({&a, &b}), [an, bn, batch, m, n, k, shared, transpose_b](Node<T>& o) {
    const T* g = o.grad.data();
    for (std::size_t bi = 0; bi < batch; ++bi) {
      const T* A = an->value.data() + bi * m * k;
      const T* B = bn->value.data() + (shared ? 0 : bi * k * n);
      const T* G = g + bi * m * n;
      if (an->requires_grad) {
        T* dA = an->ensure_grad().data() + bi * m * k;
        gemm(false, !transpose_b, m, k, n, G, B, dA, true);
      }
      if (bn->requires_grad) {
        T* dB = bn->ensure_grad().data() + (shared ? 0 : bi * k * n);
        if (transpose_b)
          gemm(true, false, n, k, m, G, A, dB, true);
        else
          gemm(true, false, k, n, m, A, G, dB, true);
      }
    }
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  const std::size_t n = a.size();
  std::vector<T> v(a.data());
  std::shared_ptr<std::vector<std::size_t>> map;
  if (a.shape() == b.shape()) {
    for (std::size_t i = 0; i < n; ++i) v[i] += b.data()[i];
  } else {
    map = std::make_shared<std::vector<std::size_t>>(broadcast_map(a.shape(), b.shape()));
    for (std::size_t i = 0; i < n; ++i) v[i] += b.data()[(*map)[i]];
  }
  auto out = new_node<T>(a.shape(), std::move(v));
  auto an = a.node(), bn = b.node();
  return finish<T>(out, recording<T>({&a, &b}), [an, bn, map](Node<T>& o) {
    if (an->requires_grad) {
      auto& ga = an->ensure_grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o.grad[i];
    }
    if (bn->requires_grad) {
      auto& gb = bn->ensure_grad();
      if (!map) {
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += o.grad[i];
      } else {
        for (std::size_t i = 0; i < o.grad.size(); ++i) gb[(*map)[i]] += o.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mul: shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  std::vector<T> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * b.data()[i];
  auto out = new_node<T>(a.shape(), std::move(v));
  auto an = a.node(), bn = b.node();
  return finish<T>(out, recording<T>({&a, &b}), [an, bn](Node<T>& o) {
    if (an->requires_grad) {
      auto& ga = an->ensure_grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o.grad[i] * bn->value[i];
    }
    if (bn->requires_grad) {
      auto& gb = bn->ensure_grad();
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += o.grad[i] * an->value[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  std::vector<T> v(a.data());
  for (auto& x : v) x *= factor;
  auto out = new_node<T>(a.shape(), std::move(v));
  auto an = a.node();
  return finish<T>(out, recording<T>({&a}), [an, factor](Node<T>& o) {
    auto& ga = an->ensure_grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += factor * o.grad[i];
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  std::vector<T> v(a.data());
  for (auto& x : v) x = x > T(0) ? x : T(0);
  auto out = new_node<T>(a.shape(), std::move(v));
  auto an = a.node();
  return finish<T>(out, recording<T>({&a}), [an](Node<T>& o) {
    auto& ga = an->ensure_grad();
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (an->value[i] > T(0)) ga[i] += o.grad[i];
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& a, int axis) {
  const auto& s = a.shape();
  const std::size_t ax = resolve_axis(axis, s.size());
  const std::size_t len = s[ax];
  const std::size_t inner = numel(Shape(s.begin() + static_cast<long>(ax) + 1, s.end()));
  const std::size_t outer = a.size() / std::max<std::size_t>(1, len * inner);
  std::vector<T> v(a.size());
  const auto& x = a.data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < len; ++j) mx = std::max(mx, static_cast<double>(x[base + j * inner]));
      if (mx == -std::numeric_limits<double>::infinity()) {
        for (std::size_t j = 0; j < len; ++j) v[base + j * inner] = T(0);
        continue;
      }
      double z = 0.0;
      for (std::size_t j = 0; j < len; ++j) z += std::exp(static_cast<double>(x[base + j * inner]) - mx);
      for (std::size_t j = 0; j < len; ++j)
        v[base + j * inner] = static_cast<T>(std::exp(static_cast<double>(x[base + j * inner]) - mx) / z);
    }
  auto out = new_node<T>(s, std::move(v));
  auto an = a.node();
  return finish<T>(out, recording<T>({&a}), [an, outer, inner, len](Node<T>& o) {
    auto& ga = an->ensure_grad();
    const auto& y = o.value;
    const auto& g = o.grad;
    for (std::size_t ob = 0; ob < outer; ++ob)
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = ob * len * inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < len; ++j) dot += static_cast<double>(g[base + j * inner]) * y[base + j * inner];
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t i = base + j * inner;
          ga[i] += static_cast<T>(y[i] * (g[i] - dot));
        }
      }
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps) {
  require(x.rank() >= 1, "layer_norm: scalar input");
  const std::size_t d = x.shape().back();
  require(gain.size() == d && bias.size() == d, "layer_norm: gain/bias extent must equal " + std::to_string(d));
  const std::size_t rows = x.size() / std::max<std::size_t>(1, d);
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  std::vector<T> v(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = x.data().data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + static_cast<double>(eps));
    (*inv_std)[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mean) * is;
      (*xhat)[r * d + j] = h;
      v[r * d + j] = static_cast<T>(h * gain.data()[j] + bias.data()[j]);
    }
  }
  auto out = new_node<T>(x.shape(), std::move(v));
  auto xn = x.node(), gn = gain.node(), bn = bias.node();
  return finish<T>(out, recording<T>({&x, &gain, &bias}), [xn, gn, bn, xhat, inv_std, rows, d](Node<T>& o) {
    const auto& g = o.grad;
    if (gn->requires_grad || bn->requires_grad) {
      auto& gg = gn->ensure_grad();
      auto& gb = bn->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) {
          gg[j] += static_cast<T>(g[r * d + j] * (*xhat)[r * d + j]);
          gb[j] += g[r * d + j];
        }
    }
    if (xn->requires_grad) {
      auto& gx = xn->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        double mean_dh = 0.0, mean_dh_h = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double dh = static_cast<double>(g[r * d + j]) * gn->value[j];
          mean_dh += dh;
          mean_dh_h += dh * (*xhat)[r * d + j];
        }
        mean_dh /= static_cast<double>(d);
        mean_dh_h /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
          const double dh = static_cast<double>(g[r * d + j]) * gn->value[j];
          gx[r * d + j] += static_cast<T>((*inv_std)[r] * (dh - mean_dh - (*xhat)[r * d + j] * mean_dh_h));
        }
      }
    }
  });
}

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, const std::vector<int>& ids, const Shape& index_shape) {
  require(table.rank() == 2, "embedding: table must be rank 2");
  require(ids.size() == numel(index_shape), "embedding: index count does not match index shape");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<T> v(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < vocab,
            "embedding: index " + std::to_string(ids[i]) + " outside vocabulary of " + std::to_string(vocab));
    std::copy_n(table.data().begin() + static_cast<long>(ids[i] * d), d, v.begin() + static_cast<long>(i * d));
  }
  Shape os = index_shape;
  os.push_back(d);
  auto out = new_node<T>(os, std::move(v));
  auto tn = table.node();
  return finish<T>(out, recording<T>({&table}), [tn, ids, d](Node<T>& o) {
    auto& gt = tn->ensure_grad();
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) gt[static_cast<std::size_t>(ids[i]) * d + j] += o.grad[i * d + j];
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, const Shape& shape) {
  require(numel(shape) == a.size(), "reshape: " + shape_string(a.shape()) + " to " + shape_string(shape));
  auto out = new_node<T>(shape, a.data());
  auto an = a.node();
  return finish<T>(out, recording<T>({&a}), [an](Node<T>& o) {
    auto& ga = an->ensure_grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o.grad[i];
  });
}

template <typename T>
Tensor<T> permute(const Tensor<T>& a, const std::vector<std::size_t>& perm) {
  const auto& s = a.shape();
  require(perm.size() == s.size(), "permute: permutation rank mismatch");
  std::vector<bool> seen(s.size(), false);
  for (auto p : perm) {
    require(p < s.size() && !seen[p], "permute: invalid permutation");
    seen[p] = true;
  }
  std::vector<std::size_t> in_stride(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) in_stride[i - 1] = in_stride[i] * s[i];
  Shape os(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) os[i] = s[perm[i]];

  auto map = std::make_shared<std::vector<std::size_t>>(a.size());
  std::vector<std::size_t> idx(s.size(), 0);
  std::size_t src = 0;
  for (std::size_t flat = 0; flat < a.size(); ++flat) {
    (*map)[flat] = src;
    for (std::size_t d = os.size(); d-- > 0;) {
      ++idx[d];
      src += in_stride[perm[d]];
      if (idx[d] < os[d]) break;
      src -= in_stride[perm[d]] * idx[d];
      idx[d] = 0;
    }
  }
  std::vector<T> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[(*map)[i]];
  auto out = new_node<T>(os, std::move(v));
  auto an = a.node();
  return finish<T>(out, recording<T>({&a}), [an, map](Node<T>& o) {
    auto& ga = an->ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) ga[(*map)[i]] += o.grad[i];
  });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& a, T p, Rng& rng, bool training) {
  require(p >= T(0) && p < T(1), "dropout: p must lie in [0,1)");
  if (!training || p == T(0)) return a;
  const T keep_scale = T(1) / (T(1) - p);
  auto mask = std::make_shared<std::vector<T>>(a.size());
  std::vector<T> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    (*mask)[i] = rng.uniform() < static_cast<double>(p) ? T(0) : keep_scale;
    v[i] = a.data()[i] * (*mask)[i];
  }
  auto out = new_node<T>(a.shape(), std::move(v));
  auto an = a.node();
  return finish<T>(out, recording<T>({&a}), [an, mask](Node<T>& o) {
    auto& ga = an->ensure_grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o.grad[i] * (*mask)[i];
  });
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<int>& targets, int ignore_index) {
  require(logits.rank() == 2, "cross_entropy: logits must be [N, V]");
  const std::size_t n = logits.dim(0), vocab = logits.dim(1);
  require(targets.size() == n, "cross_entropy: one target per row");
  auto probs = std::make_shared<std::vector<double>>(n * vocab);
  std::size_t count = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] == ignore_index) continue;
    require(targets[i] >= 0 && static_cast<std::size_t>(targets[i]) < vocab, "cross_entropy: target out of range");
    const T* row = logits.data().data() + i * vocab;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < vocab; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double z = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) z += std::exp(row[j] - mx);
    for (std::size_t j = 0; j < vocab; ++j) (*probs)[i * vocab + j] = std::exp(row[j] - mx) / z;
    total += -(row[targets[i]] - mx - std::log(z));
    ++count;
  }
  require(count > 0, "cross_entropy: every target position is padding");
  auto out = new_node<T>(Shape{}, std::vector<T>{static_cast<T>(total / static_cast<double>(count))});
  auto ln = logits.node();
  return finish<T>(out, recording<T>({&logits}), [ln, probs, targets, ignore_index, count, vocab](Node<T>& o) {
    auto& gl = ln->ensure_grad();
    const double g = static_cast<double>(o.grad[0]) / static_cast<double>(count);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i] == ignore_index) continue;
      for (std::size_t j = 0; j < vocab; ++j) {
        const double onehot = static_cast<std::size_t>(targets[i]) == j ? 1.0 : 0.0;
        gl[i * vocab + j] += static_cast<T>(g * ((*probs)[i * vocab + j] - onehot));
      }
    }
  });
}

template <typename T>
Tensor<T> weighted_sum(const Tensor<T>& a, const std::vector<T>& weights) {
  require(weights.size() == a.size(), "weighted_sum: one weight per element");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a.data()[i]) * weights[i];
  auto out = new_node<T>(Shape{}, std::vector<T>{static_cast<T>(s)});
  auto an = a.node();
  return finish<T>(out, recording<T>({&a}), [an, weights](Node<T>& o) {
    auto& ga = an->ensure_grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o.grad[0] * weights[i];
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  return weighted_sum(a, std::vector<T>(a.size(), T(1)));
}

#define SPLICELOC_INSTANTIATE(T)                                                                     \
  template class Tensor<T>;                                                                          \
  template class Tape<T>;                                                                            \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&, bool);                               \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> scale(const Tensor<T>&, T);                                                     \
  template Tensor<T> relu(const Tensor<T>&);                                                         \
  template Tensor<T> softmax(const Tensor<T>&, int);                                                 \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);            \
  template Tensor<T> embedding(const Tensor<T>&, const std::vector<int>&, const Shape&);             \
  template Tensor<T> reshape(const Tensor<T>&, const Shape&);                                        \
  template Tensor<T> permute(const Tensor<T>&, const std::vector<std::size_t>&);                     \
  template Tensor<T> dropout(const Tensor<T>&, T, Rng&, bool);                                       \
  template Tensor<T> cross_entropy(const Tensor<T>&, const std::vector<int>&, int);                  \
  template Tensor<T> weighted_sum(const Tensor<T>&, const std::vector<T>&);                          \
  template Tensor<T> sum(const Tensor<T>&);

SPLICELOC_INSTANTIATE(float)
SPLICELOC_INSTANTIATE(double)

#undef SPLICELOC_INSTANTIATE

}  // namespace spliceloc::ad
