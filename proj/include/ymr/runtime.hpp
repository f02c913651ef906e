#pragma once

#include <cstdint>
#include <functional>

namespace ymr {

// independent per-sample seeds from a run seed (splitmix64 finalizer)
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

int default_workers();
// runs body(i) for i in [0, n); results must be written to per-index slots by the caller
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace ymr
