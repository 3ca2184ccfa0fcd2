#include "tpm/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tpm {

namespace {

void require_pairs(std::span<const double> x, std::span<const double> y, std::size_t min_size) {
    if (x.size() != y.size()) throw std::invalid_argument("fit: x and y differ in length");
    if (x.size() < min_size) throw std::invalid_argument("fit: not enough points");
}

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y, 2);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: x values are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

QuadraticFit quadratic_fit(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y, 3);
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        a(i, 0) = 1.0;
        a(i, 1) = xi;
        a(i, 2) = xi * xi;
        b(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
    return {c(0), c(1), c(2)};
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y, 2);
    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    const double n = static_cast<double>(rx.size());
    const double mean = 0.5 * (n + 1.0);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
        sxy += (rx[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace tpm
