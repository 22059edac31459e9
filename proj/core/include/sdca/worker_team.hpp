#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sdca {

/// Fixed set of worker threads that execute one job per round.
///
/// run() hands the same callable to every worker (with its index) and returns
/// once all of them finished; the first exception thrown by a worker is
/// rethrown from run(). Workers optionally pin themselves to a cpu set; a
/// failed pin is ignored.
class WorkerTeam {
 public:
  explicit WorkerTeam(std::size_t size, std::vector<std::vector<int>> cpu_sets = {});
  ~WorkerTeam();

  WorkerTeam(const WorkerTeam&) = delete;
  WorkerTeam& operator=(const WorkerTeam&) = delete;

  std::size_t size() const { return workers_.size(); }

  void run(const std::function<void(std::size_t)>& job);

 private:
  void worker_loop(std::size_t index, std::vector<int> cpus);

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stopping_ = false;
  std::exception_ptr error_;
};

/// Best-effort affinity for the calling thread; returns false if not applied.
bool pin_current_thread(const std::vector<int>& cpus);

}  // namespace sdca
