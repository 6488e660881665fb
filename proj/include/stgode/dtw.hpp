#ifndef STGODE_DTW_HPP
#define STGODE_DTW_HPP

// Dynamic time warping with optional Sakoe-Chiba banding.

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "stgode/common.hpp"

namespace stgode {

struct DtwResult {
    double distance = 0.0;
    int path_length = 0;  // cells on the optimal alignment path
};

/// Cumulative-cost alignment of two series under
///   D(i,j) = |x_i - y_j| + min(D(i-1,j), D(i,j-1), D(i-1,j-1)).
/// band < 0 means unbanded; otherwise cells with |i-j| > band are excluded.
/// Ties between predecessors break diagonal first, then (i-1,j), then (i,j-1),
/// which only affects the reported path length, never the distance.
inline DtwResult dtw_align(const std::vector<double>& x, const std::vector<double>& y, int band = -1) {
    const int m = static_cast<int>(x.size());
    const int n = static_cast<int>(y.size());
    if (m == 0 || n == 0) throw ValidationError("dtw_align: series must be non-empty");
    if (band >= 0 && band < std::abs(m - n)) {
        throw ValidationError("dtw_align: band " + std::to_string(band) +
                              " is smaller than the length difference " + std::to_string(std::abs(m - n)));
    }

    const double inf = std::numeric_limits<double>::infinity();
    // rolling rows of the (m+1) x (n+1) table; row/col 0 are virtual borders
    // except D(0,0) = 0, which seeds the start cell (1,1)
    std::vector<double> prev(n + 1, inf), cur(n + 1, inf);
    std::vector<int> lprev(n + 1, 0), lcur(n + 1, 0);
    prev[0] = 0.0;

    for (int i = 1; i <= m; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        const int jlo = band < 0 ? 1 : std::max(1, i - band);
        const int jhi = band < 0 ? n : std::min(n, i + band);
        for (int j = jlo; j <= jhi; ++j) {
            const double cost = std::abs(x[i - 1] - y[j - 1]);
            const double diag = prev[j - 1];
            const double up = prev[j];
            const double left = cur[j - 1];
            double best = diag;
            int blen = lprev[j - 1];
            if (up < best) {
                best = up;
                blen = lprev[j];
            }
            if (left < best) {
                best = left;
                blen = lcur[j - 1];
            }
            cur[j] = cost + best;
            lcur[j] = blen + 1;
        }
        std::swap(prev, cur);
        std::swap(lprev, lcur);
    }

    if (!std::isfinite(prev[n])) throw ValidationError("dtw_align: band excludes every complete alignment");
    return {prev[n], lprev[n]};
}

inline double dtw_distance(const std::vector<double>& x, const std::vector<double>& y, int band = -1) {
    return dtw_align(x, y, band).distance;
}

}  // namespace stgode

#endif  // STGODE_DTW_HPP
