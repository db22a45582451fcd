// Copyright 2026 The wdistill Authors
//
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

#ifndef WDISTILL_RNG_H
#define WDISTILL_RNG_H

#include <cstdint>
#include <random>

namespace wdistill {

/// SplitMix64 finalizer.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of an independent stream for (master, a, b); order of evaluation never matters.
constexpr uint64_t stream_seed(uint64_t master, uint64_t a, uint64_t b) {
    return mix64(mix64(mix64(master) ^ a) ^ b);
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every standard library.
inline double uniform01(std::mt19937_64 &gen) {
    return static_cast<double>(gen() >> 11) * 0x1p-53;
}

}  // namespace wdistill

#endif
