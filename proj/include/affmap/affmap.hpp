#pragma once

#include "affmap/core.hpp"
#include "affmap/geometry.hpp"
#include "affmap/interaction.hpp"
#include "affmap/io.hpp"
#include "affmap/labelgen.hpp"
#include "affmap/losses.hpp"
#include "affmap/mapping.hpp"
#include "affmap/metrics.hpp"
#include "affmap/multilabel.hpp"
#include "affmap/planner.hpp"
#include "affmap/synth.hpp"
