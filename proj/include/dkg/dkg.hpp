#pragma once

#include "dkg/errors.hpp"
#include "dkg/grid.hpp"
#include "dkg/fft.hpp"
#include "dkg/field.hpp"
#include "dkg/spectral.hpp"
#include "dkg/equilibria.hpp"
#include "dkg/evolution.hpp"
#include "dkg/checkpoint.hpp"
#include "dkg/profile_io.hpp"
#include "dkg/diagnostics.hpp"
#include "dkg/resolution.hpp"
#include "dkg/scenario.hpp"
#include "dkg/report.hpp"
#include "dkg/runner.hpp"
