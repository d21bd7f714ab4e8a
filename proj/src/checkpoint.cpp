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

#include "spliceloc/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "spliceloc/error.hpp"

namespace spliceloc {
namespace {

constexpr std::uint16_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  template <typename U>
  void le(U v) {
    unsigned char b[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, sizeof(U));
  }
  void f64(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    le(u);
  }
  void f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    le(u);
  }
  void str(const std::string& s) {
    le(static_cast<std::uint16_t>(s.size()));
    bytes(s.data(), s.size());
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::vector<unsigned char> data, std::string where) : data_(std::move(data)), where_(std::move(where)) {}
  const unsigned char* take(std::size_t n) {
    if (pos_ + n > data_.size()) fail(ErrorKind::Checkpoint, "truncated checkpoint " + where_);
    const unsigned char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  template <typename U>
  U le() {
    const auto* p = take(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
    return v;
  }
  double f64() {
    const auto u = le<std::uint64_t>();
    double v;
    std::memcpy(&v, &u, 8);
    return v;
  }
  float f32() {
    const auto u = le<std::uint32_t>();
    float v;
    std::memcpy(&v, &u, 4);
    return v;
  }
  std::string str() {
    const auto n = le<std::uint16_t>();
    const auto* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  bool at_end() const { return pos_ == data_.size(); }
  const std::string& where() const { return where_; }

 private:
  std::vector<unsigned char> data_;
  std::size_t pos_ = 0;
  std::string where_;
};

Reader open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open checkpoint " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Reader(std::move(data), path.string());
}

ModelConfig read_header(Reader& r) {
  const auto* magic = r.take(4);
  if (std::memcmp(magic, "SFCK", 4) != 0) fail(ErrorKind::Checkpoint, "not a checkpoint: " + r.where());
  const auto version = r.le<std::uint16_t>();
  if (version != kVersion) fail(ErrorKind::Checkpoint, "unsupported checkpoint version " + std::to_string(version));
  const auto entries = r.le<std::uint16_t>();
  std::map<std::string, double> fields;
  for (std::uint16_t i = 0; i < entries; ++i) {
    auto key = r.str();
    fields[key] = r.f64();
  }
  return ModelConfig::from_fields(fields);
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Transformer<T>& model) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write checkpoint " + path.string());
    Writer w(out);
    w.bytes("SFCK", 4);
    w.le(kVersion);
    const auto fields = model.config().fields();
    w.le(static_cast<std::uint16_t>(fields.size()));
    for (const auto& [key, value] : fields) {
      w.str(key);
      w.f64(value);
    }
    const auto& params = model.parameters();
    w.le(static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, tensor] : params) {
      w.str(name);
      w.le(static_cast<std::uint8_t>(tensor.rank()));
      for (auto e : tensor.shape()) w.le(static_cast<std::uint32_t>(e));
      for (T v : tensor.data()) w.f32(static_cast<float>(v));
    }
    if (!out) fail(ErrorKind::Io, "failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

ModelConfig read_checkpoint_config(const std::filesystem::path& path) {
  auto r = open(path);
  return read_header(r);
}

template <typename T>
void load_checkpoint(const std::filesystem::path& path, Transformer<T>& model) {
  auto r = open(path);
  const auto stored = read_header(r);
  if (!(stored == model.config())) {
    std::string diff;
    const auto a = stored.fields(), b = model.config().fields();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].second != b[i].second)
        diff += " " + a[i].first + "=" + std::to_string(a[i].second) + " (expected " + std::to_string(b[i].second) + ")";
    fail(ErrorKind::Checkpoint, "checkpoint config mismatch in " + path.string() + ":" + diff);
  }
  auto& params = model.parameters();
  const auto count = r.le<std::uint32_t>();
  if (count != params.size())
    fail(ErrorKind::Checkpoint, "checkpoint holds " + std::to_string(count) + " parameters, model has " +
                                    std::to_string(params.size()));
  std::map<std::string, ad::Tensor<T>*> by_name;
  for (auto& [name, tensor] : params) by_name[name] = &tensor;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name = r.str();
    const auto rank = r.le<std::uint8_t>();
    ad::Shape shape(rank);
    for (auto& e : shape) e = r.le<std::uint32_t>();
    const auto it = by_name.find(name);
    if (it == by_name.end()) fail(ErrorKind::Checkpoint, "unexpected parameter '" + name + "' in " + path.string());
    if (it->second->shape() != shape)
      fail(ErrorKind::Checkpoint, "parameter '" + name + "' has shape " + ad::shape_string(shape) + ", expected " +
                                      ad::shape_string(it->second->shape()));
    for (auto& v : it->second->data()) v = static_cast<T>(r.f32());
    by_name.erase(it);
  }
  if (!r.at_end()) fail(ErrorKind::Checkpoint, "trailing bytes in checkpoint " + path.string());
}

Transformer<float> load_model(const std::filesystem::path& path) {
  Transformer<float> model(read_checkpoint_config(path), 0);
  load_checkpoint(path, model);
  return model;
}

template void save_checkpoint(const std::filesystem::path&, const Transformer<float>&);
template void save_checkpoint(const std::filesystem::path&, const Transformer<double>&);
template void load_checkpoint(const std::filesystem::path&, Transformer<float>&);
template void load_checkpoint(const std::filesystem::path&, Transformer<double>&);

}  // namespace spliceloc
