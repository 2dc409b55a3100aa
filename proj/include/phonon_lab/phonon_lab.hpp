#pragma once

#include "phonon_lab/analysis.hpp"
#include "phonon_lab/config.hpp"
#include "phonon_lab/coupling.hpp"
#include "phonon_lab/dynamics.hpp"
#include "phonon_lab/errors.hpp"
#include "phonon_lab/io.hpp"
#include "phonon_lab/optcavity.hpp"
#include "phonon_lab/parallel.hpp"
#include "phonon_lab/pipelines.hpp"
#include "phonon_lab/resonator.hpp"
#include "phonon_lab/specsynth.hpp"
#include "phonon_lab/spectrum_trace.hpp"
#include "phonon_lab/units.hpp"
