#include "kc/parallel.hpp"

#include <algorithm>

namespace kc {

ThreadPool::ThreadPool(std::size_t threads) {
  const std::size_t extra = threads > 1 ? threads - 1 : 0;
  workers_.reserve(extra);
  for (std::size_t w = 0; w < extra; ++w) {
    workers_.emplace_back([this, w] { worker_loop(w + 1); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& t : workers_) t.join();
}

void ThreadPool::drain(std::size_t worker) {
  while (true) {
    std::size_t begin;
    {
      std::lock_guard lock(mutex_);
      begin = next_chunk_;
      if (begin >= count_) return;
      next_chunk_ = std::min(count_, begin + grain_);
    }
    (*body_)(worker, begin, std::min(count_, begin + grain_));
  }
}

void ThreadPool::worker_loop(std::size_t worker) {
  std::size_t seen = 0;
  while (true) {
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
    }
    drain(worker);
    {
      std::lock_guard lock(mutex_);
      if (--busy_ == 0) done_.notify_one();
    }
  }
}

void ThreadPool::parallel_for(std::size_t count, std::size_t grain, const Body& body) {
  if (count == 0) return;
  grain = std::max<std::size_t>(1, grain);
  if (workers_.empty() || count <= grain) {
    for (std::size_t b = 0; b < count; b += grain) body(0, b, std::min(count, b + grain));
    return;
  }
  {
    std::lock_guard lock(mutex_);
    body_ = &body;
    count_ = count;
    grain_ = grain;
    next_chunk_ = 0;
    busy_ = workers_.size();
    ++generation_;
  }
  wake_.notify_all();
  drain(0);
  std::unique_lock lock(mutex_);
  done_.wait(lock, [&] { return busy_ == 0; });
  body_ = nullptr;
}

}  // namespace kc
