#ifndef CODESIGN_CODESIGN_HPP
#define CODESIGN_CODESIGN_HPP

#include "codesign/analysis.hpp"
#include "codesign/control.hpp"
#include "codesign/ea.hpp"
#include "codesign/genome.hpp"
#include "codesign/io.hpp"
#include "codesign/plant.hpp"
#include "codesign/repair.hpp"
#include "codesign/rng.hpp"

#endif  // CODESIGN_CODESIGN_HPP
