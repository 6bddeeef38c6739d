#pragma once

#include "cxhyp/asymptotics.hpp"
#include "cxhyp/ball_geometry.hpp"
#include "cxhyp/geodesic_normal_form.hpp"
#include "cxhyp/group_enum.hpp"
#include "cxhyp/indefinite_linalg.hpp"
#include "cxhyp/json_io.hpp"
#include "cxhyp/log_complex.hpp"
#include "cxhyp/quadrature.hpp"
#include "cxhyp/series_inner_products.hpp"
