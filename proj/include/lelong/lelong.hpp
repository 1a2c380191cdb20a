#pragma once

// Umbrella header.

#include "lelong/config.hpp"
#include "lelong/current.hpp"
#include "lelong/foliation.hpp"
#include "lelong/kernel.hpp"
#include "lelong/mass_profile.hpp"
#include "lelong/parallel.hpp"
#include "lelong/pipeline.hpp"
#include "lelong/quadrature.hpp"
#include "lelong/recurrence.hpp"
#include "lelong/report.hpp"
