#pragma once

#include "finsler/errors.hpp"
#include "finsler/flow.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/metric.hpp"
#include "finsler/ode.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/sampling.hpp"
#include "finsler/verify.hpp"
#include "finsler/volume.hpp"
#include "finsler/zoo.hpp"
