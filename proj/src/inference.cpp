#include "rm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rm/rng.hpp"

namespace rm {

TestResult subsample_test(const std::vector<std::string>& routes, const DeltaStatistic& stat,
                          const SubsampleOptions& opt) {
    const std::size_t N = routes.size();
    if (N == 0) throw std::invalid_argument("subsample_test: no trains");
    if (opt.subsample_size <= 0 || std::size_t(opt.subsample_size) >= N)
        throw std::invalid_argument("subsample_test: need 0 < b < N");
    if (opt.n_subsamples < 2) throw std::invalid_argument("subsample_test: need >= 2 subsamples");
    if (!(opt.alpha > 0.0) || !(opt.alpha < 1.0))
        throw std::invalid_argument("subsample_test: alpha must be in (0,1)");

    // Index trains by route stratum.
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < N; ++i) strata[routes[i]].push_back(i);

    // Stratum shares: explicit sizes, or proportional with largest-remainder
    // rounding to hit b exactly.
    std::map<std::string, int> share;
    if (!opt.per_route.empty()) {
        int total = 0;
        for (const auto& [route, members] : strata) {
            auto it = opt.per_route.find(route);
            if (it == opt.per_route.end())
                throw std::invalid_argument("subsample_test: no stratum size for route " + route);
            share[route] = it->second;
            total += it->second;
        }
        if (total != opt.subsample_size)
            throw std::invalid_argument("subsample_test: stratum sizes must sum to b");
    } else {
        std::vector<std::pair<double, std::string>> rem;
        int assigned = 0;
        for (const auto& [route, members] : strata) {
            double exact = double(opt.subsample_size) * double(members.size()) / double(N);
            int fl = int(std::floor(exact));
            share[route] = fl;
            assigned += fl;
            rem.push_back({exact - double(fl), route});
        }
        std::sort(rem.rbegin(), rem.rend());
        for (int i = 0; assigned < opt.subsample_size; ++assigned, ++i)
            share[rem[std::size_t(i) % rem.size()].second] += 1;
    }
    for (const auto& [route, members] : strata)
        if (std::size_t(share[route]) > members.size())
            throw std::invalid_argument("subsample_test: route " + route +
                                        " has fewer trains than its stratum share");

    std::vector<std::size_t> all(N);
    std::iota(all.begin(), all.end(), std::size_t(0));
    const double delta_hat = stat(all);
    const double root_b = std::sqrt(double(opt.subsample_size));

    std::vector<double> draws(std::size_t(opt.n_subsamples));
    for (int s = 0; s < opt.n_subsamples; ++s) {
        auto rng = make_engine(opt.seed, std::uint64_t(s), 0x50bULL, 0);
        std::vector<std::size_t> sub;
        sub.reserve(std::size_t(opt.subsample_size));
        for (const auto& [route, members] : strata) {
            std::vector<std::size_t> pool = members;
            int want = share[route];
            // partial Fisher-Yates: the first `want` entries are the sample
            for (int j = 0; j < want; ++j) {
                std::uniform_int_distribution<std::size_t> pick(std::size_t(j), pool.size() - 1);
                std::swap(pool[std::size_t(j)], pool[pick(rng)]);
                sub.push_back(pool[std::size_t(j)]);
            }
        }
        draws[std::size_t(s)] = root_b * (stat(sub) - delta_hat);
    }

    std::sort(draws.begin(), draws.end());
    std::size_t rank = std::size_t(std::ceil((1.0 - opt.alpha) * double(opt.n_subsamples)));
    rank = std::min(std::max<std::size_t>(rank, 1), draws.size());
    TestResult out;
    out.delta_l_hat = delta_hat;
    out.statistic = std::sqrt(double(N)) * delta_hat;
    out.critical_value = draws[rank - 1];
    out.reject = out.statistic > out.critical_value;
    std::size_t exceed = 0;
    for (double v : draws)
        if (v >= out.statistic) ++exceed;
    out.p_value_upper = double(exceed) / double(draws.size());
    out.subsample_size = opt.subsample_size;
    out.n_subsamples = opt.n_subsamples;
    return out;
}

} // namespace rm
