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

#include <stdexcept>
#include <string>

namespace natgrad {

/// Thrown when a requested size exceeds a simulator or oracle cap.
class SizeError : public std::out_of_range {
   public:
    explicit SizeError(const std::string &what) : std::out_of_range(what) {}
};

/// Thrown when operands disagree on qubit count, parameter count or matrix shape.
class DimensionError : public std::invalid_argument {
   public:
    explicit DimensionError(const std::string &what) : std::invalid_argument(what) {}
};

}  // namespace natgrad
