// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "schatten/core/matrix.hpp"
#include "schatten/core/spectral.hpp"
#include "schatten/core/stream.hpp"
#include "schatten/core/stream_io.hpp"
#include "schatten/error.hpp"
#include "schatten/estimate.hpp"
#include "schatten/fixtures.hpp"
#include "schatten/multipass.hpp"
#include "schatten/onepass.hpp"
#include "schatten/rng/four_wise_hash.hpp"
#include "schatten/rng/mix.hpp"
#include "schatten/rng/sketch_generator.hpp"
#include "schatten/roworder/count_sketch.hpp"
#include "schatten/roworder/roworder_sketch.hpp"
#include "schatten/roworder/weighted_reservoir.hpp"
