// Copyright 2026 The pmids Authors. All rights reserved.
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

#ifndef PMIDS_PMIDS_HPP
#define PMIDS_PMIDS_HPP

#include "pmids/common.hpp"
#include "pmids/lp.hpp"
#include "pmids/game.hpp"
#include "pmids/estimator.hpp"
#include "pmids/policy.hpp"
#include "pmids/classifier.hpp"
#include "pmids/contextual.hpp"
#include "pmids/kernel.hpp"
#include "pmids/harness.hpp"

#endif  // PMIDS_PMIDS_HPP
