#pragma once

#include "nldeco/config.hpp"
#include "nldeco/distribution.hpp"
#include "nldeco/dynamics.hpp"
#include "nldeco/error.hpp"
#include "nldeco/inference.hpp"
#include "nldeco/io.hpp"
#include "nldeco/levenberg_marquardt.hpp"
#include "nldeco/model.hpp"
#include "nldeco/oracle.hpp"
#include "nldeco/oracle_report.hpp"
#include "nldeco/quadrature.hpp"
#include "nldeco/reservoir.hpp"
#include "nldeco/runner.hpp"
#include "nldeco/version.hpp"
