#pragma once

#include "sccount/config.hpp"
#include "sccount/covariance.hpp"
#include "sccount/detector.hpp"
#include "sccount/errors.hpp"
#include "sccount/feature_file.hpp"
#include "sccount/gmsc.hpp"
#include "sccount/hermitian.hpp"
#include "sccount/metrics.hpp"
#include "sccount/nn.hpp"
#include "sccount/pipeline.hpp"
#include "sccount/scene.hpp"
#include "sccount/stft.hpp"
#include "sccount/wav.hpp"
