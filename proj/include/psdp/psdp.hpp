#pragma once

#include "psdp/algorithms.hpp"
#include "psdp/core.hpp"
#include "psdp/errors.hpp"
#include "psdp/io.hpp"
#include "psdp/linalg.hpp"
#include "psdp/markovjump.hpp"
#include "psdp/models.hpp"
#include "psdp/oracle.hpp"
#include "psdp/rng.hpp"
#include "psdp/rollout.hpp"
#include "psdp/simplex.hpp"
#include "psdp/stochastic.hpp"
