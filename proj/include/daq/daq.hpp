#pragma once

// Umbrella header for the DAQ weight-quantization toolkit.

#include "daq/baselines.hpp"
#include "daq/dca.hpp"
#include "daq/error.hpp"
#include "daq/formats.hpp"
#include "daq/ldra.hpp"
#include "daq/metrics.hpp"
#include "daq/parallel.hpp"
#include "daq/pipeline.hpp"
#include "daq/quantizer.hpp"
#include "daq/report.hpp"
#include "daq/synth.hpp"
#include "daq/tensor.hpp"
#include "daq/tensor_io.hpp"
