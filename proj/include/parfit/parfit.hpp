#ifndef PARFIT_PARFIT_HPP
#define PARFIT_PARFIT_HPP

#include "parfit/config.hpp"
#include "parfit/dataset.hpp"
#include "parfit/engine.hpp"
#include "parfit/errors.hpp"
#include "parfit/fit.hpp"
#include "parfit/generate.hpp"
#include "parfit/index_table.hpp"
#include "parfit/pdf.hpp"
#include "parfit/variable.hpp"

#endif
