/*
 * Copyright 2026 The flee Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "flee/dispersion.hpp"
#include "flee/dynamics.hpp"
#include "flee/error.hpp"
#include "flee/io.hpp"
#include "flee/model.hpp"
#include "flee/model_json.hpp"
#include "flee/numeric.hpp"
#include "flee/parallel.hpp"
#include "flee/phase_matrix.hpp"
#include "flee/quadrature.hpp"
#include "flee/self_energy.hpp"
#include "flee/spectral.hpp"
#include "flee/validation.hpp"
#include "flee/version.hpp"
