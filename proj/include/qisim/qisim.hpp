#pragma once

#include "qisim/bounds.hpp"
#include "qisim/config.hpp"
#include "qisim/controller.hpp"
#include "qisim/counts.hpp"
#include "qisim/csv.hpp"
#include "qisim/cycle.hpp"
#include "qisim/fock.hpp"
#include "qisim/harness.hpp"
#include "qisim/log.hpp"
#include "qisim/model.hpp"
#include "qisim/rng.hpp"
#include "qisim/sfg_dynamics.hpp"
