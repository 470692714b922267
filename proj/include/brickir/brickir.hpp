#ifndef BRICKIR_BRICKIR_HPP
#define BRICKIR_BRICKIR_HPP

#include "brickir/error.hpp"
#include "brickir/geometry.hpp"
#include "brickir/mesh.hpp"
#include "brickir/ldraw.hpp"
#include "brickir/connectors.hpp"
#include "brickir/collision.hpp"
#include "brickir/catalog.hpp"
#include "brickir/graph.hpp"
#include "brickir/program.hpp"
#include "brickir/eval.hpp"

#endif  // BRICKIR_BRICKIR_HPP
