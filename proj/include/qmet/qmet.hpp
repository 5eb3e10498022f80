// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qmet/bounds.hpp"
#include "qmet/channel.hpp"
#include "qmet/constraints.hpp"
#include "qmet/core.hpp"
#include "qmet/errors.hpp"
#include "qmet/forms.hpp"
#include "qmet/io.hpp"
#include "qmet/memory.hpp"
#include "qmet/optimizer.hpp"
#include "qmet/scenarios.hpp"
#include "qmet/solvers.hpp"
