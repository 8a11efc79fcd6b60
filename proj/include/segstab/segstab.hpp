#pragma once

// Umbrella header: robust Schur / disk D-stability of matrix segments and
// rank-one structured matrix polytopes via bialternate-product eigenvalue
// tests, with crossing certificates and a brute-force sampling oracle.

#include "segstab/types.hpp"
#include "segstab/linalg.hpp"
#include "segstab/stability.hpp"
#include "segstab/segment.hpp"
#include "segstab/polytope.hpp"
#include "segstab/oracle.hpp"
#include "segstab/io.hpp"
