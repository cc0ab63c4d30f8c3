#pragma once

#include "greedyopt/dynamic.hpp"
#include "greedyopt/endpoints.hpp"
#include "greedyopt/error.hpp"
#include "greedyopt/linalg.hpp"
#include "greedyopt/moments.hpp"
#include "greedyopt/oracle.hpp"
#include "greedyopt/orthogonalize.hpp"
#include "greedyopt/stateless.hpp"
#include "greedyopt/switch.hpp"
