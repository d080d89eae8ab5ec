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
#include "ratecon/random.hpp"

#include <algorithm>
#include <numeric>

#include "ratecon/error.hpp"

namespace ratecon {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MinibatchStream::MinibatchStream(Index n, Index batch_size, std::uint64_t seed)
    : n_(n), batch_size_(std::min(batch_size, n)), rng_(seed), order_(static_cast<std::size_t>(n)) {
  if (n <= 0 || batch_size <= 0) throw ContractError("minibatch stream needs n > 0 and batch_size > 0");
  std::iota(order_.begin(), order_.end(), Index{0});
  reshuffle();
}

void MinibatchStream::reshuffle() {
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

const std::vector<Index>& MinibatchStream::next() {
  if (cursor_ >= n_) {
    reshuffle();
    ++epoch_;
  }
  const Index end = std::min(cursor_ + batch_size_, n_);
  batch_.assign(order_.begin() + cursor_, order_.begin() + end);
  cursor_ = end;
  return batch_;
}

}  // namespace ratecon
