#pragma once

// Datalog engine over hash-indexed sorted arrays: canonical flat tuple
// storage with open-addressing prefix indexes, bulk two-pass joins, and a
// semi-naive fixpoint driver with eager merge-buffer management.

#include "budget.hpp"
#include "builtins.hpp"
#include "container.hpp"
#include "engine.hpp"
#include "hash.hpp"
#include "index_map.hpp"
#include "io.hpp"
#include "merge_buffer.hpp"
#include "parser.hpp"
#include "plan.hpp"
#include "program.hpp"
#include "ra.hpp"
#include "stats.hpp"
#include "tuple_array.hpp"
#include "types.hpp"
