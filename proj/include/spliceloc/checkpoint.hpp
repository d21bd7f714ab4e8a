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

#include <filesystem>

#include "spliceloc/model.hpp"

namespace spliceloc {

/// "SFCK", u16 version, u16 config entry count, per entry (u16 key length,
/// key, f64 value), u32 parameter count, per parameter (u16 name length, name,
/// u8 rank, u32 extents, float32 data), all little-endian.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Transformer<T>& model);

ModelConfig read_checkpoint_config(const std::filesystem::path& path);

/// Throws Checkpoint when the stored config differs from the model's or a
/// parameter is missing or misshapen.
template <typename T>
void load_checkpoint(const std::filesystem::path& path, Transformer<T>& model);

Transformer<float> load_model(const std::filesystem::path& path);

}  // namespace spliceloc
