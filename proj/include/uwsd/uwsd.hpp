#pragma once

#include "uwsd/dataset.hpp"
#include "uwsd/embedding.hpp"
#include "uwsd/engine.hpp"
#include "uwsd/error.hpp"
#include "uwsd/evaluation.hpp"
#include "uwsd/similarity.hpp"
#include "uwsd/transport.hpp"
