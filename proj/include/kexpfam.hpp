#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/data.hpp"
#include "kexpfam/hmc.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/manifest.hpp"
#include "kexpfam/metrics.hpp"
#include "kexpfam/oracles.hpp"
#include "kexpfam/reference.hpp"
#include "kexpfam/rkhs.hpp"
#include "kexpfam/rng.hpp"
#include "kexpfam/sampler.hpp"
#include "kexpfam/score_matching.hpp"
#include "kexpfam/serialize.hpp"
#include "kexpfam/trainer.hpp"
