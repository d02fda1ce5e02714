#pragma once

#include "hyperfe2/bench.hpp"
#include "hyperfe2/common.hpp"
#include "hyperfe2/config.hpp"
#include "hyperfe2/coupon.hpp"
#include "hyperfe2/cubature.hpp"
#include "hyperfe2/curves.hpp"
#include "hyperfe2/damage_material.hpp"
#include "hyperfe2/hf_solver.hpp"
#include "hyperfe2/hpr_solver.hpp"
#include "hyperfe2/matrix_io.hpp"
#include "hyperfe2/parallel.hpp"
#include "hyperfe2/presets.hpp"
#include "hyperfe2/reconstruction.hpp"
#include "hyperfe2/reduction.hpp"
#include "hyperfe2/rve_model.hpp"
#include "hyperfe2/sampling.hpp"
#include "hyperfe2/svg.hpp"
