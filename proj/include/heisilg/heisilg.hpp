#pragma once

#include "heisilg/cli.hpp"
#include "heisilg/corona.hpp"
#include "heisilg/curve.hpp"
#include "heisilg/dyadic.hpp"
#include "heisilg/generators.hpp"
#include "heisilg/heisenberg.hpp"
#include "heisilg/io.hpp"
#include "heisilg/random.hpp"
#include "heisilg/tame.hpp"
#include "heisilg/tame_extension.hpp"
#include "heisilg/tolerance.hpp"
#include "heisilg/whitney.hpp"
