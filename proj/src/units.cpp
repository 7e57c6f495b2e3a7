// SPDX-License-Identifier: Apache-2.0

#include "fdsim/units.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fdsim
{
double dbm_to_linear(double p_dbm)
{
    return std::pow(10.0, (p_dbm - 30.0) / 10.0);
}

double linear_to_dbm(double p_w)
{
    return linear_to_db(p_w) + (p_w > 0.0 ? 30.0 : 0.0);
}

double db_to_linear(double x_db)
{
    return std::pow(10.0, x_db / 10.0);
}

double linear_to_db(double x)
{
    if (x < 0.0 || std::isnan(x))
        throw std::invalid_argument("linear_to_db: negative or NaN power");
    if (x == 0.0)
        return kPowerFloorDb;
    return std::max(10.0 * std::log10(x), kPowerFloorDb);
}

double deg_to_rad(double deg)
{
    return deg * std::numbers::pi / 180.0;
}

double rad_to_deg(double rad)
{
    return rad * 180.0 / std::numbers::pi;
}
} // namespace fdsim
