#pragma once

#include "minpart/analytic.hpp"
#include "minpart/bounds.hpp"
#include "minpart/domain.hpp"
#include "minpart/error.hpp"
#include "minpart/fem.hpp"
#include "minpart/mesh.hpp"
#include "minpart/nodal.hpp"
#include "minpart/optimizer.hpp"
