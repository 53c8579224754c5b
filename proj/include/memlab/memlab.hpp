#pragma once

#include "memlab/multiset.hpp"
#include "memlab/configuration.hpp"
#include "memlab/lexer.hpp"
#include "memlab/rules.hpp"
#include "memlab/mem_format.hpp"
#include "memlab/engine.hpp"
#include "memlab/timed.hpp"
#include "memlab/reachability.hpp"
#include "memlab/ambient.hpp"
#include "memlab/brane.hpp"
#include "memlab/correspondence.hpp"
