#pragma once

#include "rforge/error.hpp"
#include "rforge/gep_baseline.hpp"
#include "rforge/modp.hpp"
#include "rforge/monomial.hpp"
#include "rforge/oracles.hpp"
#include "rforge/poly.hpp"
#include "rforge/polytope.hpp"
#include "rforge/problem_io.hpp"
#include "rforge/seeding.hpp"
#include "rforge/solver.hpp"
#include "rforge/solver_template.hpp"
#include "rforge/stability.hpp"
#include "rforge/template_gen.hpp"
#include "rforge/template_io.hpp"
#include "rforge/template_reduce.hpp"
