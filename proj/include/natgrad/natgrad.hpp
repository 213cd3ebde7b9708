// Copyright 2026 The natgrad Authors
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

#include "natgrad/circuit.hpp"
#include "natgrad/errors.hpp"
#include "natgrad/experiment.hpp"
#include "natgrad/fisher.hpp"
#include "natgrad/hamiltonian.hpp"
#include "natgrad/io.hpp"
#include "natgrad/linalg.hpp"
#include "natgrad/optimizers.hpp"
#include "natgrad/pauli.hpp"
#include "natgrad/random.hpp"
#include "natgrad/statevector.hpp"
