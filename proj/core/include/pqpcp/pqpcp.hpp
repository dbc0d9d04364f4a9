#pragma once

#include "pqpcp/error.hpp"
#include "pqpcp/image.hpp"
#include "pqpcp/matrix.hpp"
#include "pqpcp/matrix_io.hpp"
#include "pqpcp/prox.hpp"
#include "pqpcp/solver.hpp"
#include "pqpcp/synth.hpp"
