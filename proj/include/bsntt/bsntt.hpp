#pragma once

#include "circuits.hpp"
#include "engine.hpp"
#include "faultsim.hpp"
#include "field.hpp"
#include "netlist.hpp"
#include "poly_io.hpp"
#include "program.hpp"
#include "slicing.hpp"
#include "transform_plan.hpp"
