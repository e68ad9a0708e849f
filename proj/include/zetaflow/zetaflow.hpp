#pragma once

#include "zetaflow/characters.hpp"
#include "zetaflow/combination.hpp"
#include "zetaflow/errors.hpp"
#include "zetaflow/families.hpp"
#include "zetaflow/format.hpp"
#include "zetaflow/hurwitz.hpp"
#include "zetaflow/svg.hpp"
#include "zetaflow/tracker.hpp"
#include "zetaflow/types.hpp"
#include "zetaflow/zero_finder.hpp"
