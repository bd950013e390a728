// Umbrella header.
#pragma once

#include "hhoglb/quadrature.hpp"
#include "hhoglb/basis.hpp"
#include "hhoglb/mesh.hpp"
#include "hhoglb/hho.hpp"
#include "hhoglb/assembly.hpp"
#include "hhoglb/estimator.hpp"
#include "hhoglb/adaptive.hpp"
#include "hhoglb/domains.hpp"
#include "hhoglb/stabconst.hpp"
#include "hhoglb/legendre1d.hpp"
#include "hhoglb/run.hpp"
