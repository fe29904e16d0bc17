#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <numeric>

#include "sortnet/pool.hpp"

using sortnet::WorkerPool;

TEST_CASE("pools run every task to completion", "[pool]") {
  for (int workers : {1, 2, 5}) {
    WorkerPool pool(workers);
    std::atomic<int> sum{0};
    std::vector<std::function<void()>> tasks;
    for (int i = 1; i <= 100; ++i) tasks.push_back([&sum, i] { sum += i; });
    pool.run(std::move(tasks));
    CHECK(sum == 5050);

    // batches can be reused back to back
    std::atomic<int> again{0};
    std::vector<std::function<void()>> more;
    for (int i = 0; i < 10; ++i) more.push_back([&again] { ++again; });
    pool.run(std::move(more));
    CHECK(again == 10);
  }
}

TEST_CASE("task exceptions surface in run", "[pool]") {
  for (int workers : {1, 3}) {
    WorkerPool pool(workers);
    std::vector<std::function<void()>> tasks;
    tasks.push_back([] {});
    tasks.push_back([] { throw std::runtime_error("boom"); });
    tasks.push_back([] {});
    CHECK_THROWS_WITH(pool.run(std::move(tasks)), "boom");

    // the pool stays usable afterwards
    std::atomic<int> count{0};
    std::vector<std::function<void()>> after;
    for (int i = 0; i < 4; ++i) after.push_back([&count] { ++count; });
    pool.run(std::move(after));
    CHECK(count == 4);
  }
}

TEST_CASE("invalid worker counts are rejected", "[pool]") {
  CHECK_THROWS_AS(WorkerPool(0), std::invalid_argument);
  CHECK_THROWS_AS(WorkerPool(-2), std::invalid_argument);
}
