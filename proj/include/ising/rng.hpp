#pragma once

#include <cstdint>

namespace ising {

// SplitMix64 finalizer (public-domain mixing function).
std::uint64_t splitmix64(std::uint64_t x);

// Generator seed for one Monte-Carlo sample, derived from (master seed, sample
// index) only. Samples are therefore independent of execution order, so the
// runner may process them in parallel, and a longer run's first k samples
// coincide with a k-sample run.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace ising
