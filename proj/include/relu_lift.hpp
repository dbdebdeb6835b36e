#pragma once

#include "relu_lift/arrangement.hpp"
#include "relu_lift/certificates.hpp"
#include "relu_lift/convex_program.hpp"
#include "relu_lift/io.hpp"
#include "relu_lift/mappings.hpp"
#include "relu_lift/nonconvex.hpp"
#include "relu_lift/paths.hpp"
#include "relu_lift/reproduce.hpp"
