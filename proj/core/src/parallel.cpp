#include "pinnflow/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace pinnflow {

int configured_workers() {
  if (const char* env = std::getenv("PINNFLOW_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// Persistent pool; threads are created on first parallel use and live for
// the process. One parallel region is active at a time (guarded by a mutex),
// which matches the training loop's usage pattern.
class Pool {
 public:
  static Pool& instance() {
    // Leaked on purpose: worker threads outlive static destruction.
    static Pool* pool = new Pool();
    return *pool;
  }

  void run(int njobs, const std::function<void(int)>& job, int workers) {
    std::lock_guard<std::mutex> region(region_mutex_);
    ensure_threads(workers - 1);
    {
      std::lock_guard<std::mutex> lk(m_);
      job_ = &job;
      njobs_ = njobs;
      next_ = 0;
      pending_ = njobs;
      ++generation_;
    }
    cv_start_.notify_all();
    work();  // calling thread participates
    std::unique_lock<std::mutex> lk(m_);
    cv_done_.wait(lk, [this] { return pending_ == 0; });
    job_ = nullptr;
  }

 private:
  void ensure_threads(int n) {
    while (static_cast<int>(threads_.size()) < n) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }

  void worker_loop() {
    uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lk(m_);
        cv_start_.wait(lk, [&] { return generation_ != seen; });
        seen = generation_;
      }
      work();
    }
  }

  void work() {
    for (;;) {
      const int i = next_.fetch_add(1, std::memory_order_relaxed);
      if (i >= njobs_) break;
      (*job_)(i);
      if (pending_.fetch_sub(1) == 1) {
        std::lock_guard<std::mutex> lk(m_);
        cv_done_.notify_all();
      }
    }
  }

  std::mutex region_mutex_;
  std::mutex m_;
  std::condition_variable cv_start_, cv_done_;
  std::vector<std::thread> threads_;
  const std::function<void(int)>* job_ = nullptr;
  int njobs_ = 0;
  std::atomic<int> next_{0};
  std::atomic<int> pending_{0};
  uint64_t generation_ = 0;
};

}  // namespace

void parallel_run(int njobs, const std::function<void(int)>& job, int workers) {
  if (njobs <= 0) return;
  if (workers <= 1 || njobs == 1) {
    for (int i = 0; i < njobs; ++i) job(i);
    return;
  }
  Pool::instance().run(njobs, job, workers);
}

}  // namespace pinnflow
