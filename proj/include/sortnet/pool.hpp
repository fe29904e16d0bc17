#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <thread>
#include <vector>

namespace sortnet {

/// Fixed worker pool. run() executes a batch of tasks and blocks until every
/// task finished, which gives the phase barriers the engine needs. A pool of
/// one worker runs everything inline on the calling thread.
class WorkerPool {
 public:
  explicit WorkerPool(int workers) : workers_(workers) {
    if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
    for (int t = 1; t < workers; ++t) threads_.emplace_back([this] { work(); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    ready_.notify_all();
    for (std::thread& t : threads_) t.join();
  }

  int workers() const { return workers_; }

  void run(std::vector<std::function<void()>> tasks) {
    if (workers_ == 1) {
      for (auto& task : tasks) task();
      return;
    }
    {
      std::lock_guard lock(mu_);
      for (auto& task : tasks) queue_.push(std::move(task));
      pending_ += tasks.size();
    }
    ready_.notify_all();
    // the calling thread pitches in until the batch drains
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(mu_);
        if (queue_.empty()) break;
        task = std::move(queue_.front());
        queue_.pop();
      }
      execute(task);
    }
    std::unique_lock lock(mu_);
    idle_.wait(lock, [this] { return pending_ == 0; });
    if (error_) {
      std::exception_ptr e = error_;
      error_ = nullptr;
      std::rethrow_exception(e);
    }
  }

 private:
  void work() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(mu_);
        ready_.wait(lock, [this] { return stop_ || !queue_.empty(); });
        if (stop_ && queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop();
      }
      execute(task);
    }
  }

  void execute(const std::function<void()>& task) {
    try {
      task();
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!error_) error_ = std::current_exception();
    }
    std::lock_guard lock(mu_);
    if (--pending_ == 0) idle_.notify_all();
  }

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable ready_;
  std::condition_variable idle_;
  std::queue<std::function<void()>> queue_;
  std::size_t pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace sortnet
