#pragma once

#include <cmath>

namespace arisjam {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

inline double nats_to_bits(double nats) { return nats / std::log(2.0); }
inline double bits_to_nats(double bits) { return bits * std::log(2.0); }

}  // namespace arisjam
