// Copyright 2026 The lipgeo Authors
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

// Umbrella header for the library (the CLI layer lives in lipgeo/cli.hpp).

#ifndef LIPGEO_LIPGEO_HPP_
#define LIPGEO_LIPGEO_HPP_

#include "lipgeo/error.hpp"
#include "lipgeo/geometry.hpp"
#include "lipgeo/io.hpp"
#include "lipgeo/mechanisms.hpp"
#include "lipgeo/oracle.hpp"
#include "lipgeo/parallel.hpp"
#include "lipgeo/probability.hpp"

#endif  // LIPGEO_LIPGEO_HPP_
