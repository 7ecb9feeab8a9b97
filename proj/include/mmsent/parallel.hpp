// Copyright 2026 The mmsent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace mmsent {

/// Runs task(i) for i in [0, count) on at most `workers` threads. Tasks must
/// write only to their own output slot; the caller reduces the slots in index
/// order so results never depend on scheduling. If tasks throw, the exception
/// of the lowest failing index is rethrown after all threads join.
void ParallelFor(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

}  // namespace mmsent
