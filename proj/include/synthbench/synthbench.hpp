#pragma once

#include "bridge.hpp"
#include "cost.hpp"
#include "csv.hpp"
#include "datagen.hpp"
#include "dataset.hpp"
#include "encoders.hpp"
#include "error.hpp"
#include "gmm.hpp"
#include "learner.hpp"
#include "matrix.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "registry.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "search_space.hpp"
#include "smote.hpp"
#include "synthesizer.hpp"
#include "tuner.hpp"
