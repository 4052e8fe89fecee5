#pragma once

#include "effreg/errors.hpp"
#include "effreg/simplex.hpp"
#include "effreg/step_losses.hpp"
#include "effreg/lazy.hpp"
#include "effreg/biased.hpp"
#include "effreg/cascade.hpp"
#include "effreg/multiplicative.hpp"
#include "effreg/combiner.hpp"
#include "effreg/ledger.hpp"
#include "effreg/bounds.hpp"
#include "effreg/scenarios.hpp"
#include "effreg/harness.hpp"
