#pragma once

#include "complex.hpp"
#include "config.hpp"
#include "corpus.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "homology.hpp"
#include "image.hpp"
#include "pipeline.hpp"
#include "stability.hpp"
#include "stats.hpp"
#include "synthetic.hpp"
