#pragma once

#include "tooldrift/adapt.hpp"
#include "tooldrift/calc.hpp"
#include "tooldrift/commands.hpp"
#include "tooldrift/corpus.hpp"
#include "tooldrift/env.hpp"
#include "tooldrift/kv.hpp"
#include "tooldrift/mcts.hpp"
#include "tooldrift/mutation.hpp"
#include "tooldrift/policy.hpp"
#include "tooldrift/react.hpp"
#include "tooldrift/remote_policy.hpp"
#include "tooldrift/rng.hpp"
#include "tooldrift/trajectory.hpp"
#include "tooldrift/world.hpp"
