// Copyright 2026 The dprecon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPRECON_RNG_H_
#define DPRECON_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace dprecon {

// All mechanisms draw from a 64-bit Mersenne Twister so a (seed, stream id)
// pair pins the exact sample path.
using Rng = std::mt19937_64;

// Stable 64-bit FNV-1a over raw bytes. Not a cryptographic hash.
uint64_t Fnv1a64(std::string_view bytes);

// Derives an independent per-document seed from a run seed and a stream id
// (usually the document id). Parallel and serial runs that use the same
// (seed, id) pairs draw identical noise.
uint64_t DeriveStreamSeed(uint64_t seed, std::string_view stream_id);

inline Rng MakeStreamRng(uint64_t seed, std::string_view stream_id) {
  return Rng(DeriveStreamSeed(seed, stream_id));
}

}  // namespace dprecon

#endif  // DPRECON_RNG_H_
