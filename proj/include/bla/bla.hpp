#pragma once
// Umbrella header: the whole library in one include.

#include "bla/adversary.hpp"
#include "bla/bitset.hpp"
#include "bla/brb.hpp"
#include "bla/checks.hpp"
#include "bla/digest.hpp"
#include "bla/enumerate.hpp"
#include "bla/harness.hpp"
#include "bla/lattice.hpp"
#include "bla/message.hpp"
#include "bla/process.hpp"
#include "bla/signature.hpp"
#include "bla/simnet.hpp"
#include "bla/trace.hpp"
#include "bla/values.hpp"
