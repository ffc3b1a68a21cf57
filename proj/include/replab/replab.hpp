#pragma once

#include "replab/agent.hpp"
#include "replab/config.hpp"
#include "replab/encouragement.hpp"
#include "replab/env.hpp"
#include "replab/harness.hpp"
#include "replab/net.hpp"
#include "replab/optimizer.hpp"
#include "replab/rng.hpp"
#include "replab/sampling.hpp"
#include "replab/similarity.hpp"
#include "replab/store.hpp"
#include "replab/sum_tree.hpp"
#include "replab/transition.hpp"
