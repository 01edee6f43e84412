#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rggloc/sgraded.hpp"

namespace rggloc::detail {

// Random-access view of a sparse configuration. Small grids use a dense
// per-thread scratch array that is cleared on destruction; large grids use a
// hash map.
class CountLookup {
 public:
  explicit CountLookup(const CellConfig& cfg);
  CountLookup(const GridModel& grid, const std::vector<std::uint64_t>& index, const std::vector<std::int64_t>& count);
  ~CountLookup();
  CountLookup(const CountLookup&) = delete;
  CountLookup& operator=(const CountLookup&) = delete;

  std::int64_t get(std::uint64_t lin) const {
    if (dense_) return (*dense_)[lin];
    auto it = sparse_.find(lin);
    return it == sparse_.end() ? 0 : it->second;
  }

 private:
  void init(const GridModel& grid, const std::vector<std::uint64_t>& index, const std::vector<std::int64_t>& count);
  std::vector<std::int64_t>* dense_ = nullptr;
  const std::vector<std::uint64_t>* touched_ = nullptr;
  std::unordered_map<std::uint64_t, std::int64_t> sparse_;
};

// Per-thread dense scratch of int64 slots, zero on acquire and on release.
std::vector<std::int64_t>* acquire_scratch(std::uint64_t size);
void release_scratch(std::vector<std::int64_t>* buf);

inline constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 23;

}  // namespace rggloc::detail
