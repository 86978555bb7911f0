#pragma once

#include "lbfem/core.hpp"
#include "lbfem/geometry.hpp"
#include "lbfem/geometry_checks.hpp"
#include "lbfem/manufactured.hpp"
#include "lbfem/quadrature.hpp"
#include "lbfem/sparse.hpp"
#include "lbfem/solver.hpp"
#include "lbfem/p1.hpp"
#include "lbfem/surface_mesh.hpp"
#include "lbfem/bulk_mesh.hpp"
#include "lbfem/error_norms.hpp"
#include "lbfem/parametric.hpp"
#include "lbfem/trace.hpp"
#include "lbfem/narrowband.hpp"
#include "lbfem/estimators.hpp"
#include "lbfem/io.hpp"
#include "lbfem/harness.hpp"
