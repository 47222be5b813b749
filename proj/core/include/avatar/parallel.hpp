// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace avatar {

/// Worker count for parallel loops: AVATAR_THREADS if set (>=1), else the
/// hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for every i in [0, n). Indices are handed out dynamically, so
/// callers must only write to state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace avatar
