#include "cusplab/limits.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "cusplab/errors.hpp"

namespace cusplab::limits {

std::vector<std::vector<double>> neville_table(const std::vector<double>& h,
                                               const std::vector<double>& f) {
    const std::size_t n = f.size();
    std::vector<std::vector<double>> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i].resize(i + 1);
        t[i][0] = f[i];
        for (std::size_t j = 1; j <= i; ++j) {
            const double hi = h[i], hj = h[i - j];
            t[i][j] = (hj * t[i][j - 1] - hi * t[i - 1][j - 1]) / (hj - hi);
        }
    }
    return t;
}

double observed_order(double f0, double f1, double f2, double ratio) {
    const double d1 = f1 - f0, d2 = f2 - f1;
    if (d1 == 0.0 || d2 == 0.0 || (d1 > 0) != (d2 > 0)) return 0.0;
    return std::log(std::abs(d1 / d2)) / std::log(1.0 / ratio);
}

LimitEstimate extrapolate(const std::vector<double>& nodes, const std::vector<double>& values,
                          const std::vector<double>& params) {
    if (values.size() < 3 || nodes.size() != values.size())
        throw DomainError("extrapolation needs at least three samples");
    LimitEstimate out;
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i)
        out.sequence.emplace_back(i < params.size() ? params[i] : nodes[i], values[i]);
    auto t = neville_table(nodes, values);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double diff = std::abs(t[n - 1][j] - t[n - 2][j]);
        if (diff < best) {
            best = diff;
            out.value = t[n - 1][j];
        }
    }
    out.error = best;
    if (nodes[n - 2] != 0.0 && nodes[n - 1] != 0.0) {
        const double ratio = nodes[n - 1] / nodes[n - 2];
        if (ratio > 0.0 && ratio < 1.0)
            out.observed_order = observed_order(values[n - 3], values[n - 2], values[n - 1], ratio);
    }
    bool inc = true, dec = true, cauchy = true;
    for (std::size_t i = 1; i < n; ++i) {
        inc = inc && values[i] >= values[i - 1];
        dec = dec && values[i] <= values[i - 1];
        if (i >= 2)
            cauchy = cauchy && std::abs(values[i] - values[i - 1]) <= std::abs(values[i - 1] - values[i - 2]);
    }
    if (inc || dec) {
        out.certified = true;
        out.certificate = "monotone";
    } else if (cauchy) {
        out.certified = true;
        out.certificate = "cauchy";
    } else {
        out.certificate = "none";
    }
    return out;
}

LimitEstimate richardson(const std::function<double(double)>& f, double h0, double ratio, int n,
                         double order) {
    std::vector<double> nodes, values, params;
    double h = h0;
    for (int k = 0; k < n; ++k, h *= ratio) {
        params.push_back(h);
        nodes.push_back(std::pow(h, order));
        values.push_back(f(h));
    }
    return extrapolate(nodes, values, params);
}

LinearFit least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    if (m == 0) throw DomainError("least squares with no rows");
    const Eigen::Index k = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd a(m, k);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        b(i) = y[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    LinearFit fit;
    fit.coef.assign(x.data(), x.data() + k);
    fit.rms = std::sqrt((a * x - b).squaredNorm() / static_cast<double>(m));
    return fit;
}

}  // namespace cusplab::limits
