#pragma once

#include "qchan/errors.hpp"
#include "qchan/linalg.hpp"
#include "qchan/channel.hpp"
#include "qchan/algebra.hpp"
#include "qchan/criteria.hpp"
#include "qchan/dynamics.hpp"
#include "qchan/fixture.hpp"
#include "qchan/report.hpp"
