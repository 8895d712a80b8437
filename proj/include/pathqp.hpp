// Copyright 2026 The pathqp Authors
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


// Core library. File formats live in pathqp/io.hpp, which additionally
// needs nlohmann/json on the include path.

#pragma once

#include "pathqp/errors.hpp"
#include "pathqp/linalg.hpp"
#include "pathqp/csc_matrix.hpp"
#include "pathqp/patterned_matrix.hpp"
#include "pathqp/matrix_market.hpp"
#include "pathqp/gridmap.hpp"
#include "pathqp/reference_path.hpp"
#include "pathqp/qp_build.hpp"
#include "pathqp/scaling.hpp"
#include "pathqp/structured_kernels.hpp"
#include "pathqp/admm.hpp"
#include "pathqp/planner.hpp"
#include "pathqp/synthetic.hpp"
#include "pathqp/pipeline.hpp"
#include "pathqp/bench.hpp"
