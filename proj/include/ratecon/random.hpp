// Copyright 2026 The ratecon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ratecon/dataset.hpp"

namespace ratecon {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; turns (seed, stream) pairs into independent seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Epoch-shuffled minibatches of positions 0..n-1. Every position appears
// exactly once per epoch; the last batch of an epoch may be short.
class MinibatchStream {
 public:
  MinibatchStream(Index n, Index batch_size, std::uint64_t seed);

  const std::vector<Index>& next();
  Index epoch() const { return epoch_; }

 private:
  void reshuffle();

  Index n_;
  Index batch_size_;
  Rng rng_;
  std::vector<Index> order_;
  std::vector<Index> batch_;
  Index cursor_ = 0;
  Index epoch_ = 0;
};

}  // namespace ratecon
