// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace fdsim
{
/// Floor reported for zero power, in dBm or dB.
inline constexpr double kPowerFloorDb = -400.0;

double dbm_to_linear(double p_dbm); // W, 30 dBm -> 1 W
double linear_to_dbm(double p_w);   // zero -> kPowerFloorDb
double db_to_linear(double x_db);   // power ratio
double linear_to_db(double x);      // zero -> kPowerFloorDb
double deg_to_rad(double deg);
double rad_to_deg(double rad);
} // namespace fdsim
