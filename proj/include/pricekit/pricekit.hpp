#pragma once

#include "pricekit/datagen/fixtures.hpp"
#include "pricekit/datagen/generate.hpp"
#include "pricekit/methods/solve.hpp"
#include "pricekit/model/builders.hpp"
#include "pricekit/model/profit.hpp"
#include "pricekit/model/validate.hpp"
