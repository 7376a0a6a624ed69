#include "relaywait/protocol_sim.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>
#include <vector>

namespace relaywait {

namespace {

constexpr std::uint64_t kBlockSize = 4096;

struct Sums {
    double y = 0.0;
    double t = 0.0;
    double yy = 0.0;
    double tt = 0.0;
    double yt = 0.0;

    void add(const CycleResult& c)
    {
        y += c.delivered;
        t += c.elapsed;
        yy += c.delivered * c.delivered;
        tt += c.elapsed * c.elapsed;
        yt += c.delivered * c.elapsed;
    }

    void add(const Sums& o)
    {
        y += o.y;
        t += o.t;
        yy += o.yy;
        tt += o.tt;
        yt += o.yt;
    }
};

}  // namespace

ThroughputEstimate estimate_renewal(std::uint64_t cycles, std::uint64_t seed,
                                    const std::function<CycleResult(Rng&)>& run_one,
                                    unsigned threads)
{
    if (cycles < 1000) throw std::invalid_argument("at least 1000 cycles are required");

    const std::uint64_t blocks = (cycles + kBlockSize - 1) / kBlockSize;
    std::vector<Sums> partial(blocks);

    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t b = next++; b < blocks; b = next++) {
            const std::uint64_t end = std::min(cycles, (b + 1) * kBlockSize);
            Sums s;
            for (std::uint64_t i = b * kBlockSize; i < end; ++i) {
                Rng rng = Rng::stream(seed, i);
                s.add(run_one(rng));
            }
            partial[b] = s;
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }

    Sums total;
    for (const auto& s : partial) total.add(s);

    const double n = static_cast<double>(cycles);
    const double ratio = total.y / total.t;
    // Residuals d_i = y_i - ratio * t_i; Var(ratio) ~ sum d_i^2 / (n (n-1) tbar^2).
    const double ss = std::max(0.0, total.yy - 2.0 * ratio * total.yt + ratio * ratio * total.tt);
    const double t_bar = total.t / n;
    ThroughputEstimate est;
    est.mean = ratio;
    est.std_error = std::sqrt(ss / (n * (n - 1.0))) / t_bar;
    est.cycles = cycles;
    est.total_time = total.t;
    return est;
}

ThroughputEstimate estimate_throughput(const StoppingPolicy& policy, const SystemParams& params,
                                       std::uint64_t cycles, std::uint64_t seed, unsigned threads)
{
    params.validate();
    const ContentionSampler contention(params);
    return estimate_renewal(
        cycles, seed,
        [&](Rng& rng) {
            RandomEnvironment<Rng> env(contention, params, rng);
            return run_cycle(policy, params, env);
        },
        threads);
}

}  // namespace relaywait
