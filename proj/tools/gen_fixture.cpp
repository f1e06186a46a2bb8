// Regenerates the bundled synthetic weekly fixture under data/: two price
// series driven by a regime-switching 2-D stable VAR(1).  The calm regime
// brackets a high-variation stretch; parameters differ per regime in both the
// coefficient matrix and the innovation laws.  Deterministic for a given seed.

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "stablevar/detail/mat2.hpp"
#include "stablevar/detail/rng.hpp"
#include "stablevar/series.hpp"
#include "stablevar/stable.hpp"

namespace sv = stablevar;

int main(int argc, char** argv) {
    std::string outdir = "data";
    std::uint64_t seed = 731;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--outdir" && i + 1 < argc) outdir = argv[++i];
        else if (a == "--seed" && i + 1 < argc) seed = std::stoull(argv[++i]);
        else {
            std::fprintf(stderr, "usage: gen_fixture [--outdir DIR] [--seed N]\n");
            return 1;
        }
    }

    const std::size_t n_returns = 1082; // 1083 weekly prices
    const std::size_t r1_start = 321, r1_end = 660;

    const sv::detail::Mat2 theta_hi{{0.2706, -0.0569, 0.0063, 0.2134}};
    const sv::detail::Mat2 theta_lo{{0.3119, 0.1403, 0.0010, 0.1472}};
    const sv::StableParams z_a_hi{1.9219, 0.0236, -0.5714, 0.0007};
    const sv::StableParams z_b_hi{1.7229, 0.0114, 1.0000, 0.0016};
    const sv::StableParams z_a_lo{1.8243, 0.0119, -0.3416, -0.0004};
    const sv::StableParams z_b_lo{1.8424, 0.0074, -0.0160, 0.0000};

    sv::detail::Rng rng(seed);
    auto draw = [&](const sv::StableParams& p) {
        return p.sigma * sv::detail::cms_standard(p.alpha, p.beta, rng.uniform_angle(),
                                                  rng.exponential()) +
               p.mu;
    };

    std::vector<double> ra(n_returns), rb(n_returns);
    std::array<double, 2> x{0.0, 0.0};
    for (std::size_t t = 0; t < n_returns; ++t) {
        const bool hi = t >= r1_start && t <= r1_end;
        const auto& th = hi ? theta_hi : theta_lo;
        const auto pred = th * x;
        x = {pred[0] + draw(hi ? z_a_hi : z_a_lo), pred[1] + draw(hi ? z_b_hi : z_b_lo)};
        ra[t] = x[0];
        rb[t] = x[1];
    }

    const std::string first_date = "2000-01-07";
    std::vector<std::string> dates_a, dates_b;
    std::vector<double> pa, pb;
    // one extra leading week on the first asset exercises the join-drop path
    dates_a.push_back(sv::io::add_days(first_date, -7));
    pa.push_back(1785.0);
    double price_a = 1800.0, price_b = 4.10;
    dates_a.push_back(first_date);
    dates_b.push_back(first_date);
    pa.push_back(price_a);
    pb.push_back(price_b);
    for (std::size_t t = 0; t < n_returns; ++t) {
        price_a *= std::exp(ra[t]);
        price_b *= std::exp(rb[t]);
        const std::string d = sv::io::add_days(first_date, 7 * static_cast<long>(t + 1));
        dates_a.push_back(d);
        dates_b.push_back(d);
        pa.push_back(price_a);
        pb.push_back(price_b);
    }

    sv::io::write_series_csv(outdir + "/cu_usd.csv", dates_a, pa);
    sv::io::write_series_csv(outdir + "/usdpln.csv", dates_b, pb);
    std::printf("wrote %s/cu_usd.csv (%zu rows) and %s/usdpln.csv (%zu rows)\n",
                outdir.c_str(), dates_a.size(), outdir.c_str(), dates_b.size());
    return 0;
}
