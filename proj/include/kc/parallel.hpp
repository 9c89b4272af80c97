#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace kc {

/// Fixed set of workers running blocking parallel loops. The calling thread
/// takes part as worker 0, so a pool of size 1 spawns no threads.
class ThreadPool {
 public:
  using Body = std::function<void(std::size_t worker, std::size_t begin, std::size_t end)>;

  explicit ThreadPool(std::size_t threads = 1);
  ~ThreadPool();
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  std::size_t size() const noexcept { return workers_.size() + 1; }

  /// Splits [0, count) into chunks of `grain` and hands them out dynamically.
  /// Results must not depend on which worker ran which chunk.
  void parallel_for(std::size_t count, std::size_t grain, const Body& body);

 private:
  void worker_loop(std::size_t worker);
  void drain(std::size_t worker);

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const Body* body_ = nullptr;
  std::size_t count_ = 0;
  std::size_t grain_ = 1;
  std::size_t next_chunk_ = 0;
  std::size_t busy_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace kc
