// Umbrella header.
#pragma once

#include "picosync/analysis.hpp"
#include "picosync/channel.hpp"
#include "picosync/clock.hpp"
#include "picosync/errors.hpp"
#include "picosync/estimator.hpp"
#include "picosync/harness.hpp"
#include "picosync/twtt.hpp"
#include "picosync/types.hpp"
#include "picosync/waveform.hpp"
