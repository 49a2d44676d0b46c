/*
 * earfit - 3D ear reconstruction by analysis-by-synthesis.
 *
 * File: tools/parallel.hpp
 *
 * Copyright 2026 The earfit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#ifndef EARFIT_TOOLS_PARALLEL_HPP
#define EARFIT_TOOLS_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace earfit {
namespace tools {

/**
 * Calls body(i) for i in [0, n) on up to jobs threads. Each index runs
 * exactly once; body must only touch per-index state, which keeps results
 * independent of the job count.
 */
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body&& body)
{
    const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
    if (workers == 1 || n <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < std::min(workers, n); ++t)
    {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
            {
                body(i);
            }
        });
    }
    for (auto& thread : threads)
    {
        thread.join();
    }
}

} // namespace tools
} // namespace earfit

#endif /* EARFIT_TOOLS_PARALLEL_HPP */
