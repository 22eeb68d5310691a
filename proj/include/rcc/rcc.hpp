// Umbrella header.
#pragma once

#include "rcc/baseline.hpp"
#include "rcc/bitstream.hpp"
#include "rcc/channel.hpp"
#include "rcc/codebook.hpp"
#include "rcc/combinadics.hpp"
#include "rcc/container.hpp"
#include "rcc/diffusion.hpp"
#include "rcc/harness.hpp"
#include "rcc/metrics.hpp"
#include "rcc/protocols.hpp"
#include "rcc/random.hpp"
#include "rcc/sparse_approx.hpp"
