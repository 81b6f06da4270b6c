#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hrd {

// Job-count resolution: explicit argument > HRDEPTH_JOBS > hardware cores.
inline unsigned resolve_jobs(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HRDEPTH_JOBS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

// Splits [0, count) into contiguous blocks, one worker thread per block.
// Workers only write to disjoint state indexed by item, so results are
// independent of the schedule.
inline void parallel_for(std::size_t count, unsigned jobs,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  jobs = resolve_jobs(jobs);
  if (count == 0) return;
  const std::size_t workers = std::min<std::size_t>(jobs, count);
  if (workers <= 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hrd
