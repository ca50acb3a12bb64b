// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#ifndef SNAS_SNAS_HPP
#define SNAS_SNAS_HPP

#include "benchmark.hpp"
#include "common.hpp"
#include "metrics.hpp"
#include "moea.hpp"
#include "pairs.hpp"
#include "search_space.hpp"
#include "surrogate.hpp"
#include "train_ensemble.hpp"

#endif
