#pragma once

#include "proxnet/error.hpp"
#include "proxnet/linalg.hpp"
#include "proxnet/sets.hpp"
#include "proxnet/objective.hpp"
#include "proxnet/dykstra.hpp"
#include "proxnet/qp.hpp"
#include "proxnet/model.hpp"
#include "proxnet/network.hpp"
#include "proxnet/prox.hpp"
#include "proxnet/consensus.hpp"
#include "proxnet/scenario.hpp"
#include "proxnet/bench.hpp"
#include "proxnet/io.hpp"
