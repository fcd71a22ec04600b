#include <cmath>
#include <iomanip>
#include <sstream>

#include "arlequin/study.hpp"

namespace arlequin {

std::vector<ReportLine> convergence_table(const std::vector<ResultRow>& rows) {
  std::vector<ReportLine> out;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    ReportLine line{r.eps, r.error, std::nullopt};
    if (!out.empty()) {
      const auto& prev = out.back();
      if (prev.error > 0.0 && r.error > 0.0 && prev.eps != r.eps)
        line.slope = std::log(prev.error / r.error) / std::log(prev.eps / r.eps);
    }
    out.push_back(line);
  }
  return out;
}

std::optional<double> fitted_slope(const std::vector<ReportLine>& lines) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& l : lines) {
    if (!(l.error > 0.0)) continue;
    const double x = std::log(l.eps), y = std::log(l.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

std::string render_report(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << std::setprecision(6);
  if (!rows.empty()) os << "coefficient: " << rows.front().coefficient << " (" << rows.front().mode << ", bc "
                        << rows.front().bc_direction << ")\n";
  const auto table = convergence_table(rows);
  os << std::left << std::setw(14) << "eps" << std::setw(16) << "error" << std::setw(12) << "slope" << "\n";
  for (const auto& l : table) {
    os << std::setw(14) << l.eps << std::setw(16) << l.error;
    if (l.slope) os << std::setw(12) << *l.slope;
    os << "\n";
  }
  if (const auto s = fitted_slope(table)) os << "fitted order: " << *s << "\n";

  int c1 = 0, c2 = 0, ok = 0, under = 0, outside = 0;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    ++ok;
    c1 += r.condition1;
    c2 += r.condition2;
    under += r.under_resolved;
    outside += r.outside_theory;
  }
  os << "conditions (empirical): condition1 " << c1 << "/" << ok << ", condition2 " << c2 << "/" << ok << "\n";
  if (under) os << "under-resolved rows: " << under << "\n";
  if (outside) os << "outside-theory rows (discontinuous coefficient): " << outside << "\n";
  for (const auto& r : rows)
    if (!r.ok) os << "FAILED eps=" << r.eps << ": " << r.message << "\n";
  return os.str();
}

void write_report_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  const auto old_precision = os.precision(17);
  os << "eps,error,slope\n";
  for (const auto& l : convergence_table(rows)) {
    os << l.eps << ',' << l.error << ',';
    if (l.slope) os << *l.slope;
    os << '\n';
  }
  os.precision(old_precision);
}

std::string plot_script(const std::string& results_csv) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set xlabel 'eps'\n"
     << "set ylabel '|kbar_opt - k*|'\n"
     << "set key off\n"
     << "plot '" << results_csv << "' every ::1 using 5:16 with linespoints pt 7\n";
  return os.str();
}

}  // namespace arlequin
