#include "cellload/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <string>
#include <thread>

#include "cellload/errors.hpp"

namespace cellload {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSectors = 12;
constexpr double kEscapeTarget = 1e-6;
constexpr double kTailTarget = 0.01;
constexpr std::size_t kBatches = 20;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

Point uniform_in_disc(double radius, Rng& rng) {
    const double r = radius * std::sqrt(uniform01(rng));
    const double phi = 2.0 * kPi * uniform01(rng);
    return {r * std::cos(phi), r * std::sin(phi)};
}

long poisson(double mean, Rng& rng) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<long>(mean)(rng);
}

double dist2(const Point& a, const Point& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Other BSs sorted by distance from the origin, with their norms.
struct BsLayout {
    PointSet points;
    std::vector<double> norms;
    double cell_bound;  ///< typical cell lies inside b(o, cell_bound)
    bool truncated;
};

BsLayout sample_bs_layout(double lambda_b, double window, Rng& rng) {
    BsLayout out;
    // PPP radii in increasing order: pi lambda r_k^2 are the arrival times of a
    // unit-rate Poisson process, so no sort is needed.
    std::exponential_distribution<double> gap(1.0);
    const double scale = 1.0 / (kPi * lambda_b);
    std::array<bool, kSectors> seen{};
    int found = 0;
    double reach = window;
    for (double arrival = gap(rng);; arrival += gap(rng)) {
        const double r = std::sqrt(arrival * scale);
        if (r > window) break;
        const double phi = 2.0 * kPi * uniform01(rng);
        out.points.push_back({r * std::cos(phi), r * std::sin(phi)});
        out.norms.push_back(r);
        // If every 30-degree sector holds a BS within d, any u with |u| > d / sqrt(3)
        // has some BS x within 30 degrees of it and |x| <= d < 2 |u| cos(30), so
        // |x - u| < |u| and u is outside the typical cell.
        const int sector = std::min(kSectors - 1, static_cast<int>(phi / (2.0 * kPi / kSectors)));
        if (found < kSectors && !seen[sector]) {
            seen[sector] = true;
            if (++found == kSectors) reach = r;
        }
    }
    out.cell_bound = found == kSectors ? reach / std::sqrt(3.0) * (1.0 + 1e-12) : window;
    out.truncated = found < kSectors || 2.0 * out.cell_bound > window;
    return out;
}

// d2^{-alpha/2}, with multiplication for the common integer cases.
double path_gain(double d2, double half_alpha) {
    if (half_alpha == 2.0) return 1.0 / (d2 * d2);
    if (half_alpha == 1.5) return 1.0 / (d2 * std::sqrt(d2));
    return std::pow(d2, -half_alpha);
}

// Unit-mean exponential fades on every link; the origin BS serves.
double rayleigh_sir(const Point& u, const BsLayout& bs, double alpha, Rng& rng) {
    std::exponential_distribution<double> fade(1.0);
    const double half_alpha = 0.5 * alpha;
    const double signal = fade(rng) * path_gain(u.x * u.x + u.y * u.y, half_alpha);
    double interference = 0.0;
    for (const auto& x : bs.points) interference += fade(rng) * path_gain(dist2(u, x), half_alpha);
    return interference > 0.0 ? signal / interference : std::numeric_limits<double>::infinity();
}

template <class Work>
void run_chunked(std::size_t count, std::size_t chunks, Work work) {
    chunks = std::min(chunks, count);
    if (chunks <= 1) {
        work(0, count);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(chunks);
    const std::size_t per = (count + chunks - 1) / chunks;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = std::min(count, c * per), end = std::min(count, begin + per);
        threads.emplace_back([&, c, begin, end] {
            try {
                work(begin, end);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// u belongs to the typical cell iff no other BS is strictly closer than the origin.
bool in_typical_cell(const Point& u, const BsLayout& bs) {
    const double ru2 = u.x * u.x + u.y * u.y;
    const double limit = 2.0 * std::sqrt(ru2);
    for (std::size_t i = 0; i < bs.points.size(); ++i) {
        if (bs.norms[i] >= limit) break;
        if (dist2(u, bs.points[i]) < ru2) return false;
    }
    return true;
}

struct CellDraw {
    Realization r;
    PointSet members;
    BsLayout bs;
};

CellDraw draw_cell(const NetworkModel& net, const SimConfig& cfg, Rng& rng) {
    CellDraw d;
    d.bs = sample_bs_layout(net.lambda_b, cfg.window_radius, rng);
    d.r.truncated = d.bs.truncated;
    for (const auto& u : sample_pcp(net.users, d.bs.cell_bound, rng))
        if (in_typical_cell(u, d.bs)) d.members.push_back(u);
    d.r.load = static_cast<long>(d.members.size());
    if (cfg.area_probes > 0) {
        // b(o, r_nn/2) is always inside the cell; only the annulus beyond it is probed.
        const double inner = d.bs.norms.empty() ? d.bs.cell_bound : std::min(0.5 * d.bs.norms.front(), d.bs.cell_bound);
        const double outer = d.bs.cell_bound;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < cfg.area_probes; ++i) {
            const double r = std::sqrt(inner * inner + (outer * outer - inner * inner) * uniform01(rng));
            const double phi = 2.0 * kPi * uniform01(rng);
            if (in_typical_cell(Point{r * std::cos(phi), r * std::sin(phi)}, d.bs)) ++hits;
        }
        d.r.cell_area = kPi * (inner * inner + (outer * outer - inner * inner) * static_cast<double>(hits) /
                                                   static_cast<double>(cfg.area_probes));
    }
    return d;
}

void require_alpha_for_sim(double alpha) {
    if (!(alpha > 2.0) || !std::isfinite(alpha)) throw ValidationError("alpha", "must be > 2");
}

void require_resolved(const SimConfig& cfg) {
    if (!(cfg.window_radius > 0.0)) throw ValidationError("sim.window_radius", "config not resolved");
}

Estimate proportion(std::size_t hits, std::size_t total) {
    if (total == 0) return {std::nan(""), std::nan("")};
    const double p = static_cast<double>(hits) / static_cast<double>(total);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(total))};
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double Point::norm() const { return std::hypot(x, y); }

// -- configuration -----------------------------------------------------------

double window_escape_bound(double lambda_b, double window_radius) {
    // Each sector of the disc of radius W sqrt(3) / 2 must hold a BS.
    const double sector_area = kPi * 0.75 * window_radius * window_radius / kSectors;
    return std::min(1.0, kSectors * std::exp(-lambda_b * sector_area));
}

double interference_tail_ratio(double lambda_b, double window_radius, double alpha) {
    const double r0 = 1.0 / std::sqrt(lambda_b);
    if (window_radius <= r0) return std::numeric_limits<double>::infinity();
    const double tail = std::pow(window_radius, 2.0 - alpha);
    return tail / (std::pow(r0, 2.0 - alpha) - tail);
}

double default_window_radius(double lambda_b, std::optional<double> alpha) {
    // 12 exp(-pi lambda W^2 / 16) = 1e-6.
    double w = std::sqrt(16.0 * std::log(kSectors / kEscapeTarget) / (kPi * lambda_b));
    if (alpha && *alpha >= 3.0) {
        // (W sqrt(lambda_b))^{alpha - 2} = 1 + 1 / 0.01.
        w = std::max(w, std::pow(1.0 + 1.0 / kTailTarget, 1.0 / (*alpha - 2.0)) / std::sqrt(lambda_b));
    }
    return w * 1.001;
}

void SimConfig::validate(const NetworkModel& net, std::optional<double> alpha) const {
    net.validate();
    if (realizations < 1) throw ValidationError("sim.realizations", "must be >= 1");
    if (window_radius == 0.0) return;
    if (!(window_radius > 0.0) || !std::isfinite(window_radius))
        throw ValidationError("sim.window_radius", "must be finite and > 0");
    if (window_escape_bound(net.lambda_b, window_radius) > kEscapeTarget)
        throw ValidationError("sim.window_radius", "too small: typical cell may exceed half the window (need >= " +
                                                       format_double(default_window_radius(net.lambda_b)) + " km)");
    if (alpha && *alpha >= 3.0 && interference_tail_ratio(net.lambda_b, window_radius, *alpha) > kTailTarget)
        throw ValidationError("sim.window_radius", "too small: interference beyond the window exceeds 1% (need >= " +
                                                       format_double(default_window_radius(net.lambda_b, alpha)) +
                                                       " km)");
}

SimConfig SimConfig::resolved(const NetworkModel& net, std::optional<double> alpha) const {
    validate(net, alpha);
    SimConfig out = *this;
    if (out.window_radius == 0.0) out.window_radius = default_window_radius(net.lambda_b, alpha);
    if (out.parallel_chunks == 0) out.parallel_chunks = std::max(1u, std::thread::hardware_concurrency());
    return out;
}

// -- sampling ----------------------------------------------------------------

Rng realization_rng(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed;
    const std::uint64_t a = splitmix64(state);
    state = a ^ (index * 0xd1b54a32d192ed03ULL);
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
                      static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state))};
    return Rng(seq);
}

PointSet sample_ppp(double intensity, double radius, Rng& rng) {
    if (intensity < 0.0 || radius < 0.0) throw DomainError("sample_ppp: intensity and radius must be >= 0");
    const long n = poisson(intensity * kPi * radius * radius, rng);
    PointSet out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) out.push_back(uniform_in_disc(radius, rng));
    return out;
}

PointSet sample_pcp(const UserModel& model, double radius, Rng& rng) {
    model.validate();
    PointSet out;
    if (model.m_bar == 0.0) return out;
    const double reach = radius + cluster_truncation_radius(model);
    const double r2 = radius * radius;
    const PointSet parents = sample_ppp(model.lambda_p, reach, rng);
    std::normal_distribution<double> gauss(0.0, model.cluster_scale());
    for (const auto& c : parents) {
        const long k = poisson(model.m_bar, rng);
        for (long j = 0; j < k; ++j) {
            Point u;
            if (model.is_thomas()) {
                u = {c.x + gauss(rng), c.y + gauss(rng)};
            } else {
                const Point d = uniform_in_disc(model.cluster_scale(), rng);
                u = {c.x + d.x, c.y + d.y};
            }
            if (u.x * u.x + u.y * u.y <= r2) out.push_back(u);
        }
    }
    return out;
}

Realization sample_typical_cell_load(const NetworkModel& net, const SimConfig& cfg, Rng& rng) {
    require_resolved(cfg);
    return draw_cell(net, cfg, rng).r;
}

Realization sample_sir_rate(const NetworkModel& net, const SimConfig& cfg, const RateConfig& rate, Rng& rng) {
    require_resolved(cfg);
    CellDraw d = draw_cell(net, cfg, rng);
    if (d.r.load == 0) return d.r;

    std::uniform_int_distribution<std::size_t> pick(0, d.members.size() - 1);
    const Point u = d.members[pick(rng)];
    const double sir = rayleigh_sir(u, d.bs, rate.alpha, rng);
    const double n = static_cast<double>(d.r.load);
    d.r.sir = sir;
    d.r.rate = std::min(rate.bandwidth_w / n * std::log2(1.0 + sir), rate.backhaul_rb / n);
    return d.r;
}

std::vector<Realization> run_simulation(const NetworkModel& net, const SimConfig& cfg_in, const RateConfig* rate) {
    if (rate) rate->validate();
    const SimConfig cfg = cfg_in.resolved(net, rate ? std::optional<double>(rate->alpha) : std::nullopt);
    std::vector<Realization> out(cfg.realizations);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = realization_rng(cfg.seed, i);
            out[i] = rate ? sample_sir_rate(net, cfg, *rate, rng) : sample_typical_cell_load(net, cfg, rng);
            out[i].index = i;
        }
    };

    run_chunked(cfg.realizations, cfg.parallel_chunks, work);
    return out;
}

double sample_uniform_location_sir(double lambda_b, const SimConfig& cfg, double alpha, Rng& rng) {
    require_resolved(cfg);
    const BsLayout bs = sample_bs_layout(lambda_b, cfg.window_radius, rng);
    Point u;
    do {
        u = uniform_in_disc(bs.cell_bound, rng);
    } while (!in_typical_cell(u, bs));
    return rayleigh_sir(u, bs, alpha, rng);
}

std::vector<double> run_uniform_location_sir(double lambda_b, const SimConfig& cfg_in, double alpha) {
    require_alpha_for_sim(alpha);
    // Any user model will do for validation; only lambda_b matters here.
    const NetworkModel probe{lambda_b, UserModel{1.0, 0.0, Thomas{1.0}}};
    const SimConfig cfg = cfg_in.resolved(probe, alpha);
    std::vector<double> out(cfg.realizations);
    run_chunked(cfg.realizations, cfg.parallel_chunks, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = realization_rng(cfg.seed, i);
            out[i] = sample_uniform_location_sir(lambda_b, cfg, alpha, rng);
        }
    });
    return out;
}

Estimate empirical_ccdf(std::span<const double> samples, double tau) {
    std::size_t hits = 0;
    for (double s : samples)
        if (s > tau) ++hits;
    return proportion(hits, samples.size());
}

// -- summaries ---------------------------------------------------------------

LoadPmf empirical_pmf(std::span<const Realization> rs) {
    if (rs.empty()) throw DomainError("empirical_pmf: no realizations");
    long max_load = 0;
    for (const auto& r : rs) max_load = std::max(max_load, r.load);
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_load) + 1, 0);
    for (const auto& r : rs) ++counts[static_cast<std::size_t>(r.load)];
    LoadPmf out;
    out.probs.resize(counts.size());
    for (std::size_t n = 0; n < counts.size(); ++n)
        out.probs[n] = static_cast<double>(counts[n]) / static_cast<double>(rs.size());
    out.dft_size = 0;
    return out;
}

LoadStatistics load_statistics(std::span<const Realization> rs) {
    if (rs.empty()) throw DomainError("load_statistics: no realizations");
    LoadStatistics s;
    const double n = static_cast<double>(rs.size());
    s.realizations = rs.size();
    double m1 = 0.0, m2 = 0.0, zeros = 0.0;
    for (const auto& r : rs) {
        const double l = static_cast<double>(r.load);
        m1 += l;
        m2 += l * l;
        if (r.load == 0) zeros += 1.0;
        if (r.truncated) ++s.truncated;
    }
    m1 /= n;
    m2 /= n;
    double c2 = 0.0, c4 = 0.0;
    for (const auto& r : rs) {
        const double l = static_cast<double>(r.load);
        c2 += (l - m1) * (l - m1);
        c4 += (l * l - m2) * (l * l - m2);
    }
    const double var = n > 1 ? c2 / (n - 1) : 0.0;
    s.mean = {m1, std::sqrt(var / n)};
    s.second_moment = {m2, n > 1 ? std::sqrt(c4 / (n - 1) / n) : 0.0};
    s.variance = {var, 0.0};
    s.normalized_variance = {m1 > 0.0 ? var / (m1 * m1) : std::nan(""), 0.0};
    s.void_probability = zeros / n;

    if (rs.size() >= 2 * kBatches) {
        std::vector<double> vb, nvb;
        const std::size_t per = rs.size() / kBatches;
        for (std::size_t b = 0; b < kBatches; ++b) {
            double a1 = 0.0, a2 = 0.0;
            for (std::size_t i = b * per; i < (b + 1) * per; ++i) {
                const double l = static_cast<double>(rs[i].load);
                a1 += l;
                a2 += l * l;
            }
            a1 /= static_cast<double>(per);
            const double v = (a2 - static_cast<double>(per) * a1 * a1) / static_cast<double>(per - 1);
            vb.push_back(v);
            nvb.push_back(a1 > 0.0 ? v / (a1 * a1) : 0.0);
        }
        auto batch_se = [](const std::vector<double>& x) {
            double mean = 0.0;
            for (double v : x) mean += v;
            mean /= static_cast<double>(x.size());
            double ss = 0.0;
            for (double v : x) ss += (v - mean) * (v - mean);
            return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
        };
        s.variance.std_error = batch_se(vb);
        s.normalized_variance.std_error = batch_se(nvb);
    }
    return s;
}

Estimate empirical_sir_ccdf(std::span<const Realization> rs, double tau) {
    std::size_t total = 0, hits = 0;
    for (const auto& r : rs) {
        if (!r.sir) continue;
        ++total;
        if (*r.sir > tau) ++hits;
    }
    return proportion(hits, total);
}

std::vector<Estimate> empirical_rate_ccdf(std::span<const Realization> rs, std::span<const double> thresholds) {
    std::vector<Estimate> out;
    for (double rho : thresholds) {
        std::size_t total = 0, hits = 0;
        for (const auto& r : rs) {
            if (!r.rate) continue;
            ++total;
            if (*r.rate > rho) ++hits;
        }
        out.push_back(proportion(hits, total));
    }
    return out;
}

void write_raw_csv(std::ostream& out, std::span<const Realization> rs) {
    out << "realization_index,load,sir,rate\n";
    for (const auto& r : rs) {
        out << r.index << ',' << r.load << ',';
        if (r.sir) out << format_double(*r.sir);
        out << ',';
        if (r.rate) out << format_double(*r.rate);
        out << '\n';
    }
}

}  // namespace cellload
