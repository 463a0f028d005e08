#pragma once

#include "equiloc/core/errors.hpp"
#include "equiloc/core/linalg.hpp"
#include "equiloc/core/polynomial.hpp"
#include "equiloc/core/quadrature.hpp"
#include "equiloc/core/rational.hpp"
#include "equiloc/core/smooth_step.hpp"

#include "equiloc/amplitude.hpp"
#include "equiloc/amplitude_grammar.hpp"
#include "equiloc/checks.hpp"
#include "equiloc/desing.hpp"
#include "equiloc/fit.hpp"
#include "equiloc/harness.hpp"
#include "equiloc/level_set.hpp"
#include "equiloc/oscillatory.hpp"
#include "equiloc/residue.hpp"
#include "equiloc/symplectic.hpp"
