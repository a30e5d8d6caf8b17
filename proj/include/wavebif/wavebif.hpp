#pragma once

#include "wavebif/amplitude.hpp"
#include "wavebif/config.hpp"
#include "wavebif/dns.hpp"
#include "wavebif/field.hpp"
#include "wavebif/harness.hpp"
#include "wavebif/model.hpp"
#include "wavebif/reduction.hpp"
#include "wavebif/spectral.hpp"
#include "wavebif/tolerances.hpp"
