// Copyright 2026 The iwies Authors.
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

#include "iwies/behavior.hpp"
#include "iwies/checkpoint.hpp"
#include "iwies/environments.hpp"
#include "iwies/errors.hpp"
#include "iwies/es_engine.hpp"
#include "iwies/geometry.hpp"
#include "iwies/harness.hpp"
#include "iwies/parallel_eval.hpp"
#include "iwies/policy_net.hpp"
#include "iwies/random.hpp"
#include "iwies/stats.hpp"
#include "iwies/text.hpp"
#include "iwies/weighting.hpp"
