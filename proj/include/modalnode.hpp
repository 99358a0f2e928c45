// Copyright 2026 The modalnode Authors
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

#ifndef MODALNODE_HPP_
#define MODALNODE_HPP_

#include "modalnode/binary_io.hpp"
#include "modalnode/dataset.hpp"
#include "modalnode/error.hpp"
#include "modalnode/evaluation.hpp"
#include "modalnode/excitation.hpp"
#include "modalnode/integrator.hpp"
#include "modalnode/modal_core.hpp"
#include "modalnode/neural.hpp"
#include "modalnode/nonlinearity.hpp"
#include "modalnode/oscillator.hpp"
#include "modalnode/parallel.hpp"
#include "modalnode/render.hpp"
#include "modalnode/training.hpp"

#endif  // MODALNODE_HPP_
