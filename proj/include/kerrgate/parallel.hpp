// Copyright 2026 The kerrgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Fixed-slot parallel loops. Work item i always writes slot i, and any
// reduction over the slots is done afterwards in index order, so results do
// not depend on the number of workers.

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace kerrgate {

/// Environment variable holding the default worker count.
inline constexpr const char* kThreadsEnvVar = "KERRGATE_THREADS";

/// KERRGATE_THREADS if set to a positive integer, else hardware concurrency.
int default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers (<= 0 means
/// default_thread_count()). Items are interleaved across workers. The first
/// exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace kerrgate
