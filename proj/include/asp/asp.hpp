#pragma once

#include "asp/affordance.hpp"
#include "asp/agent.hpp"
#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/geom.hpp"
#include "asp/harness.hpp"
#include "asp/nav.hpp"
#include "asp/render.hpp"
#include "asp/scene_map.hpp"
#include "asp/scene_types.hpp"
#include "asp/semantics.hpp"
#include "asp/serialize.hpp"
#include "asp/sim.hpp"
#include "asp/sim_backends.hpp"
#include "asp/sim_scenes.hpp"
#include "asp/skills.hpp"
#include "asp/tools.hpp"
