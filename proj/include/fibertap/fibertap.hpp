#pragma once

#include "fibertap/config.hpp"
#include "fibertap/demod.hpp"
#include "fibertap/enhance.hpp"
#include "fibertap/error.hpp"
#include "fibertap/io/csv.hpp"
#include "fibertap/io/trace_file.hpp"
#include "fibertap/io/wav.hpp"
#include "fibertap/manifest.hpp"
#include "fibertap/model.hpp"
#include "fibertap/noise.hpp"
#include "fibertap/pipeline.hpp"
#include "fibertap/sensitivity.hpp"
#include "fibertap/trace.hpp"
