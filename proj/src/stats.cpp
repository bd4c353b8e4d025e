#include "reformkit/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace reformkit::stats {

double mean(std::span<double const> xs)
{
    if (xs.empty()) {
        throw std::invalid_argument("mean of an empty sample");
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<double const> xs)
{
    if (xs.size() < 2) {
        throw std::invalid_argument("sample variance needs two observations");
    }
    double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - m) * (x - m);
    }
    return ss / static_cast<double>(xs.size() - 1);
}

double population_stddev(std::span<double const> xs)
{
    double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

double f_sf(double x, double df1, double df2)
{
    if (x <= 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    boost::math::fisher_f_distribution<double> dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double t_two_sided_p(double t, double df)
{
    if (std::isinf(t)) {
        return 0.0;
    }
    boost::math::students_t_distribution<double> dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

TestResult levene_test(std::span<double const> a, std::span<double const> b)
{
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("levene_test needs at least two observations per group");
    }
    auto deviations = [](std::span<double const> xs) {
        double m = mean(xs);
        std::vector<double> z;
        z.reserve(xs.size());
        for (double x : xs) {
            z.push_back(std::abs(x - m));
        }
        return z;
    };
    auto za = deviations(a);
    auto zb = deviations(b);
    double na = static_cast<double>(za.size());
    double nb = static_cast<double>(zb.size());
    double n = na + nb;
    double ma = mean(za);
    double mb = mean(zb);
    double grand = (ma * na + mb * nb) / n;

    double between = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
    double within = 0.0;
    for (double z : za) within += (z - ma) * (z - ma);
    for (double z : zb) within += (z - mb) * (z - mb);

    TestResult r;
    r.df1 = 1.0;
    r.df2 = n - 2.0;
    if (within == 0.0) {
        if (between == 0.0) {
            return r;
        }
        r.statistic = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        r.infinite = true;
        return r;
    }
    r.statistic = (n - 2.0) * between / within;
    r.p_value = f_sf(r.statistic, r.df1, r.df2);
    return r;
}

TestResult t_test(std::span<double const> a, std::span<double const> b, bool equal_variance)
{
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("t_test needs at least two observations per group");
    }
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double ma = mean(a);
    double mb = mean(b);
    double va = sample_variance(a);
    double vb = sample_variance(b);

    TestResult r;
    double se2 = 0.0;
    if (equal_variance) {
        double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        se2 = pooled * (1.0 / na + 1.0 / nb);
        r.df1 = na + nb - 2.0;
    } else {
        double qa = va / na;
        double qb = vb / nb;
        se2 = qa + qb;
        double denom = qa * qa / (na - 1.0) + qb * qb / (nb - 1.0);
        r.df1 = denom > 0.0 ? se2 * se2 / denom : na + nb - 2.0;
    }
    double diff = ma - mb;
    if (se2 == 0.0) {
        if (diff == 0.0) {
            return r;
        }
        r.statistic = std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.p_value = 0.0;
        r.infinite = true;
        return r;
    }
    r.statistic = diff / std::sqrt(se2);
    r.p_value = t_two_sided_p(r.statistic, r.df1);
    return r;
}

}  // namespace reformkit::stats
