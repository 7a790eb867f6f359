#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace minihes {

// Per-worker contiguous ranges over the unified entity sequence
// (users first, then items). Disjoint, covering, deterministic.
struct WorkPartition {
  int worker_count = 1;
  std::vector<std::pair<int, int>> assignments;  // [begin, end) entity ranges
};

namespace detail {

// Splits [begin,end) into `parts` contiguous ranges, balanced either by
// count or by the supplied per-entity weights (prefix-sum greedy cut).
inline void split_range(int begin, int end, int parts,
                        const std::vector<long long>* weights,
                        std::vector<std::pair<int, int>>& out) {
  if (parts <= 0) return;
  if (weights == nullptr) {
    int n = end - begin;
    int base = n / parts, rem = n % parts;
    int cur = begin;
    for (int p = 0; p < parts; ++p) {
      int len = base + (p < rem ? 1 : 0);
      out.emplace_back(cur, cur + len);
      cur += len;
    }
    return;
  }
  long long total = 0;
  for (int e = begin; e < end; ++e) total += (*weights)[e];
  int cur = begin;
  long long consumed = 0;
  for (int p = 0; p < parts; ++p) {
    long long target = total * (p + 1) / parts;
    int stop = (p == parts - 1) ? end : cur;
    while (stop < end && consumed < target) consumed += (*weights)[stop++];
    out.emplace_back(cur, stop);
    cur = stop;
  }
  out.back().second = end;
}

}  // namespace detail

// Half the workers cover user blocks, half item blocks; within each side
// ranges are contiguous. Optional weights (rating counts) balance the cuts.
inline WorkPartition make_partition(
    int num_users, int num_items, int worker_count,
    const std::vector<long long>* entity_weights = nullptr) {
  if (worker_count < 1) throw std::invalid_argument("worker_count < 1");
  WorkPartition part;
  part.worker_count = worker_count;
  const int total = num_users + num_items;
  if (worker_count == 1) {
    part.assignments.emplace_back(0, total);
    return part;
  }
  int user_workers = worker_count / 2;
  int item_workers = worker_count - user_workers;
  detail::split_range(0, num_users, user_workers, entity_weights,
                      part.assignments);
  detail::split_range(num_users, total, item_workers, entity_weights,
                      part.assignments);
  return part;
}

// Long-lived worker pool. run() dispatches one callable per worker and
// blocks until all finish; the first worker exception is rethrown on the
// caller. With a single worker everything runs inline.
class ThreadPool {
 public:
  explicit ThreadPool(int workers) : worker_count_(workers) {
    if (workers < 1) throw std::invalid_argument("workers < 1");
    if (workers == 1) return;
    threads_.reserve(workers);
    for (int w = 0; w < workers; ++w)
      threads_.emplace_back([this, w] { worker_loop(w); });
  }

  ~ThreadPool() {
    if (threads_.empty()) return;
    {
      std::lock_guard lk(mu_);
      shutdown_ = true;
    }
    cv_start_.notify_all();
    for (auto& t : threads_) t.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int worker_count() const { return worker_count_; }

  void run(const std::function<void(int)>& per_worker) {
    if (threads_.empty()) {
      per_worker(0);
      return;
    }
    std::unique_lock lk(mu_);
    job_ = &per_worker;
    pending_ = worker_count_;
    error_ = nullptr;
    ++generation_;
    cv_start_.notify_all();
    cv_done_.wait(lk, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void worker_loop(int id) {
    std::uint64_t seen = 0;
    while (true) {
      const std::function<void(int)>* job = nullptr;
      {
        std::unique_lock lk(mu_);
        cv_start_.wait(lk, [&] { return shutdown_ || generation_ != seen; });
        if (shutdown_) return;
        seen = generation_;
        job = job_;
      }
      std::exception_ptr err;
      try {
        (*job)(id);
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard lk(mu_);
        if (err && !error_) error_ = err;
        if (--pending_ == 0) cv_done_.notify_one();
      }
    }
  }

  int worker_count_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_start_;
  std::condition_variable cv_done_;
  const std::function<void(int)>* job_ = nullptr;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool shutdown_ = false;
  std::exception_ptr error_ = nullptr;
};

// Runs block_task(entity) for every entity of the partition. Tasks must
// write only entity-local output, which makes the assembled result
// bitwise-identical to a sequential loop regardless of worker count.
inline void run_blocks(ThreadPool& pool, const WorkPartition& partition,
                       const std::function<void(int)>& block_task) {
  if (partition.worker_count != pool.worker_count())
    throw std::invalid_argument("partition/pool worker count mismatch");
  pool.run([&](int w) {
    auto [begin, end] = partition.assignments[w];
    for (int e = begin; e < end; ++e) {
      try {
        block_task(e);
      } catch (const std::exception& ex) {
        throw std::runtime_error("entity " + std::to_string(e) + ": " +
                                 ex.what());
      }
    }
  });
}

// Deterministic parallel reduction: fixed-size chunks are computed by
// whichever worker owns them and summed in chunk order, so the result does
// not depend on the worker count.
template <typename ChunkFn>
std::vector<double> chunked_map(ThreadPool& pool, std::size_t n,
                                std::size_t chunk, std::size_t lanes,
                                ChunkFn&& fn) {
  const std::size_t num_chunks = (n + chunk - 1) / chunk;
  std::vector<double> partials(num_chunks * lanes, 0.0);
  const int workers = pool.worker_count();
  pool.run([&](int w) {
    for (std::size_t c = static_cast<std::size_t>(w); c < num_chunks;
         c += workers) {
      std::size_t lo = c * chunk;
      std::size_t hi = std::min(n, lo + chunk);
      fn(lo, hi, &partials[c * lanes]);
    }
  });
  std::vector<double> sums(lanes, 0.0);
  for (std::size_t c = 0; c < num_chunks; ++c)
    for (std::size_t l = 0; l < lanes; ++l) sums[l] += partials[c * lanes + l];
  return sums;
}

}  // namespace minihes
