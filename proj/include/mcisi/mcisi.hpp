#pragma once

#include "mcisi/aign.hpp"
#include "mcisi/baa.hpp"
#include "mcisi/bounds.hpp"
#include "mcisi/channel.hpp"
#include "mcisi/config.hpp"
#include "mcisi/information.hpp"
#include "mcisi/mcsim.hpp"
#include "mcisi/sweep.hpp"
#include "mcisi/validation.hpp"
