#pragma once

#include "wdirac/error.hpp"
#include "wdirac/domain.hpp"
#include "wdirac/weights.hpp"
#include "wdirac/assembly.hpp"
#include "wdirac/spectral.hpp"
#include "wdirac/variational.hpp"
#include "wdirac/analysis.hpp"
#include "wdirac/wavekernel.hpp"
#include "wdirac/io.hpp"
#include "wdirac/config.hpp"
#include "wdirac/experiments.hpp"
