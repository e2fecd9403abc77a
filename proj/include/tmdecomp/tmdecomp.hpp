#ifndef TMDECOMP_TMDECOMP_HPP
#define TMDECOMP_TMDECOMP_HPP

#include "tmdecomp/common.hpp"
#include "tmdecomp/dataset.hpp"
#include "tmdecomp/metrics.hpp"
#include "tmdecomp/pipeline.hpp"
#include "tmdecomp/prox.hpp"
#include "tmdecomp/solver.hpp"
#include "tmdecomp/spectral.hpp"
#include "tmdecomp/synthgen.hpp"
#include "tmdecomp/weights.hpp"

#endif  // TMDECOMP_TMDECOMP_HPP
