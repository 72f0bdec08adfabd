// include/lyralign/lyralign.hpp

// Copyright 2026  lyralign authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "lyralign/align.hpp"
#include "lyralign/alignment.hpp"
#include "lyralign/codec.hpp"
#include "lyralign/common.hpp"
#include "lyralign/demo.hpp"
#include "lyralign/evaluate.hpp"
#include "lyralign/loss.hpp"
#include "lyralign/metrics.hpp"
#include "lyralign/mix.hpp"
#include "lyralign/model.hpp"
#include "lyralign/posteriogram.hpp"
#include "lyralign/wav.hpp"
