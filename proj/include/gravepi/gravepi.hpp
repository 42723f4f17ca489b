/*
* Copyright (C) 2026 gravepi contributors
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

#include "gravepi/climate.hpp"
#include "gravepi/coupling.hpp"
#include "gravepi/csv.hpp"
#include "gravepi/data.hpp"
#include "gravepi/errors.hpp"
#include "gravepi/fitting.hpp"
#include "gravepi/fixtures.hpp"
#include "gravepi/gravity.hpp"
#include "gravepi/integrate.hpp"
#include "gravepi/model.hpp"
#include "gravepi/parallel.hpp"
#include "gravepi/random.hpp"
#include "gravepi/stats.hpp"
#include "gravepi/svg.hpp"
#include "gravepi/synthetic.hpp"
