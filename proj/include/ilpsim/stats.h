#ifndef ILPSIM_STATS_H
#define ILPSIM_STATS_H

#include <cmath>
#include <cstddef>
#include <vector>

namespace ilpsim {

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit f;
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return f;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit f = least_squares(x, y);
    double r = std::sqrt(f.r2);
    return f.slope < 0 ? -r : r;
}

}  // namespace ilpsim

#endif
