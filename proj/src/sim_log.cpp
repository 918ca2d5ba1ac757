#include "predfb/sim_log.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace predfb {

Vec state_at(const SimulationLog& log, double t) {
  if (t < 0.0) {
    if (!log.x_history) throw std::domain_error("log has no stored state history");
    if (t < -log.r - 1e-12) throw std::domain_error("time precedes the stored state history");
    return log.x_history(std::max(t, -log.r));
  }
  if (log.rows.empty()) throw std::domain_error("log has no rows");
  if (t > log.rows.back().t + 1e-12) throw std::domain_error("time beyond the end of the log");

  const auto it = std::lower_bound(log.rows.begin(), log.rows.end(), t,
                                   [](const LogRow& row, double s) { return row.t < s; });
  if (it == log.rows.end()) return log.rows.back().x;
  if (it == log.rows.begin() || it->t == t) return it->x;
  const LogRow& hi = *it;
  const LogRow& lo = *std::prev(it);
  const double span = hi.t - lo.t;
  const double s = span > 0.0 ? (t - lo.t) / span : 0.0;
  Vec out(lo.x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lo.x[i] + s * (hi.x[i] - lo.x[i]);
  return out;
}

double sup_state_norm(const SimulationLog& log, double t) {
  double sup = 0.0;
  for (const LogRow& row : log.rows) {
    if (row.t > t + 1e-12) break;
    sup = std::max({sup, norm2(row.x), norm2(row.z), std::abs(row.w)});
  }
  return sup;
}

}  // namespace predfb
