#ifndef IMPROPERDIM_IMPROPERDIM_HPP
#define IMPROPERDIM_IMPROPERDIM_HPP

#include "improperdim/augmented_stats.hpp"
#include "improperdim/detectors.hpp"
#include "improperdim/harness/config.hpp"
#include "improperdim/harness/dataset_io.hpp"
#include "improperdim/harness/montecarlo.hpp"
#include "improperdim/numerics.hpp"
#include "improperdim/signal_model.hpp"

#endif // IMPROPERDIM_IMPROPERDIM_HPP
