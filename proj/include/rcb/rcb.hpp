#pragma once

#include "rcb/analytics.hpp"
#include "rcb/core.hpp"
#include "rcb/experiments.hpp"
#include "rcb/ingest.hpp"
#include "rcb/oracle.hpp"
#include "rcb/random.hpp"
#include "rcb/structures.hpp"
