// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coopnet/activations.hpp"
#include "coopnet/checkpoint.hpp"
#include "coopnet/config.hpp"
#include "coopnet/data.hpp"
#include "coopnet/gradcheck.hpp"
#include "coopnet/metrics.hpp"
#include "coopnet/network.hpp"
#include "coopnet/ops.hpp"
#include "coopnet/optim.hpp"
#include "coopnet/tape.hpp"
#include "coopnet/tensor.hpp"
#include "coopnet/trainer.hpp"
