// Copyright 2026 The gmec-aobb Authors
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

// Umbrella header for the library (everything except the CLI).

#pragma once

#include "gmec/error.hpp"
#include "gmec/graph.hpp"
#include "gmec/heuristic.hpp"
#include "gmec/kbest.hpp"
#include "gmec/model.hpp"
#include "gmec/oracle.hpp"
#include "gmec/pipeline.hpp"
#include "gmec/pruning.hpp"
#include "gmec/rng.hpp"
#include "gmec/search.hpp"
