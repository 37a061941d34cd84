#pragma once

// Everything at once; individual headers stay usable on their own.
#include "asl/grid.hpp"
#include "asl/fft.hpp"
#include "asl/spectral.hpp"
#include "asl/rng.hpp"
#include "asl/dyadic.hpp"
#include "asl/norms.hpp"
#include "asl/snapshot.hpp"
#include "asl/initial.hpp"
#include "asl/velocity.hpp"
#include "asl/harmonic.hpp"
#include "asl/solver.hpp"
#include "asl/stability.hpp"
#include "asl/config.hpp"
#include "asl/experiments.hpp"
