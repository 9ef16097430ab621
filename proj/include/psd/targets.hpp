#pragma once

#include "psd/targets/gaussian.hpp"
#include "psd/targets/mixture.hpp"
#include "psd/targets/q_family.hpp"
#include "psd/targets/rbm.hpp"
