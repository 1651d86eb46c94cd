#pragma once

#include "ajb/adam.hpp"
#include "ajb/attack.hpp"
#include "ajb/config.hpp"
#include "ajb/error.hpp"
#include "ajb/eval.hpp"
#include "ajb/fixtures.hpp"
#include "ajb/manifest.hpp"
#include "ajb/metrics.hpp"
#include "ajb/model.hpp"
#include "ajb/random.hpp"
#include "ajb/rir.hpp"
#include "ajb/sampling.hpp"
#include "ajb/text.hpp"
#include "ajb/toy_model.hpp"
#include "ajb/wav_io.hpp"
#include "ajb/waveform.hpp"
