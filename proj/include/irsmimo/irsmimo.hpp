#pragma once

#include "irsmimo/channel.hpp"
#include "irsmimo/config.hpp"
#include "irsmimo/core.hpp"
#include "irsmimo/experiments.hpp"
#include "irsmimo/feed_geometry.hpp"
#include "irsmimo/lens_array.hpp"
#include "irsmimo/linalg.hpp"
#include "irsmimo/power.hpp"
#include "irsmimo/precoders.hpp"
#include "irsmimo/report.hpp"
#include "irsmimo/waterfill.hpp"
