#pragma once

// Umbrella header.

#include "hba/beliefs.hpp"
#include "hba/bisim.hpp"
#include "hba/chain.hpp"
#include "hba/chain_builder.hpp"
#include "hba/common.hpp"
#include "hba/critical.hpp"
#include "hba/csv.hpp"
#include "hba/episode.hpp"
#include "hba/examples.hpp"
#include "hba/figure1.hpp"
#include "hba/game.hpp"
#include "hba/history.hpp"
#include "hba/planner.hpp"
#include "hba/random_game.hpp"
#include "hba/rl_type.hpp"
#include "hba/scenario.hpp"
#include "hba/strategy.hpp"
#include "hba/trace.hpp"
