#pragma once

#include "semcc/action.hpp"
#include "semcc/channel.hpp"
#include "semcc/env.hpp"
#include "semcc/errors.hpp"
#include "semcc/harness/config.hpp"
#include "semcc/harness/experiment.hpp"
#include "semcc/ppo/agent.hpp"
#include "semcc/ppo/checkpoint.hpp"
#include "semcc/ppo/gae.hpp"
#include "semcc/ppo/network.hpp"
#include "semcc/ppo/objective.hpp"
#include "semcc/ppo/policy.hpp"
#include "semcc/ppo/trainer.hpp"
#include "semcc/random.hpp"
#include "semcc/schedulers.hpp"
#include "semcc/semantics.hpp"
