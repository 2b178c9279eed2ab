// Truncated Wigner evolution of the polariton field:
//
//   i dPsi = (omega0 - omega_p - a d^2 + V + g(|Psi|^2 - 1/dx) - i Gamma/2) Psi dt
//            + F_p dt + sqrt(Gamma/(4 dx)) dW,
//
// with E[dW] = 0, E[dW^2] = 0 and independent quadratures of variance dt,
// and ensemble management (ordered block accumulation, checkpoints).
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "polariton/correlations.hpp"
#include "polariton/meanfield.hpp"
#include "polariton/rng.hpp"

namespace polariton {

/// Per-realization noise source with a step cursor. Step 0 is reserved for
/// the initial vacuum draw.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint32_t realization, std::size_t n_points)
        : field_(seed, realization), n_points_(n_points) {}

    std::size_t size() const { return n_points_; }
    std::uint64_t cursor() const { return cursor_; }
    void seek(std::uint64_t step) { cursor_ = step; }

    /// Draws the increment for the current step and advances the cursor.
    void next(std::span<cplx> out, std::span<const double> sigma) {
        if (out.size() != n_points_) throw GridMismatch(n_points_, out.size());
        field_.fill(cursor_++, out, sigma);
    }

    void draw(std::uint64_t step, std::span<cplx> out, double sigma) const {
        if (out.size() != n_points_) throw GridMismatch(n_points_, out.size());
        field_.fill(step, out, sigma);
    }

private:
    rng::GaussianField field_;
    std::size_t n_points_;
    std::uint64_t cursor_ = 1;
};

struct StochasticOptions {
    bool noise = true;
    bool wigner_offset = true;  ///< the -g/dx shift of the interaction
};

/// Split-step propagator plus additive Wigner noise after every step.
/// The per-step noise variance (1 - e^{-Gamma dt})/(2dx) per point makes the
/// discrete linear vacuum exactly 1/(2dx).
class StochasticStepper {
public:
    StochasticStepper(const Grid& grid, const CavityParams& params, const PotentialProfile& potential,
                      const Absorber& absorber = {}, const StochasticOptions& opt = {})
        : stepper_(grid, params, potential, absorber, opt.wigner_offset ? 1.0 / grid.dx() : 0.0),
          opt_(opt), sigma_(grid.size()), buffer_(grid.size()) {
        const auto loss = stepper_.loss();
        for (std::size_t i = 0; i < grid.size(); ++i)
            sigma_[i] = opt.noise ? std::sqrt(-std::expm1(-loss[i] * grid.dt()) / (4.0 * grid.dx())) : 0.0;
    }

    const Grid& grid() const { return stepper_.grid(); }
    std::span<const double> noise_sigma() const { return sigma_; }

    void step(std::span<cplx> psi, std::span<const cplx> pump, NoiseStream& noise) {
        stepper_.step(psi, pump);
        if (!opt_.noise) return;
        noise.next(buffer_, sigma_);
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += buffer_[i];
    }

private:
    SplitStepper stepper_;
    StochasticOptions opt_;
    std::vector<double> sigma_;
    std::vector<cplx> buffer_;
};

/// One stochastic step.
inline FieldState evolve_stochastic(const FieldState& state, const CavityParams& params, const PumpProfile& pump,
                                    const PotentialProfile& potential, double dt, NoiseStream& noise,
                                    const Absorber& absorber = {}, const StochasticOptions& opt = {}) {
    const Grid grid = state.grid.with_dt(dt);
    StochasticStepper stepper(grid, params, potential, absorber, opt);
    FieldState next = state;
    const auto f = pump.sample(grid);
    stepper.step(next.psi, f, noise);
    next.t += dt;
    return next;
}

/// Adds vacuum Wigner noise of variance 1/(2dx) per point.
inline void add_vacuum_noise(std::span<cplx> psi, const Grid& grid, const NoiseStream& noise) {
    std::vector<cplx> buf(psi.size());
    noise.draw(0, buf, std::sqrt(0.25 / grid.dx()));
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += buf[i];
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct TwaConfig {
    Grid grid;
    CavityParams params;
    PumpProfile pump;
    PotentialProfile potential;
    Absorber absorber;
    std::uint64_t n_realizations = 0;
    double burn_in = 0.0;           ///< [ps]; <= 0 selects 10/gamma
    double sample_interval = 0.0;   ///< [ps]; <= 0 selects the decorrelation floor
    std::uint64_t samples_per_realization = 1;
    std::uint64_t seed = 1;
    double decorrelation_floor = 0.0;  ///< [ps]; <= 0 selects 2/gamma
    std::size_t n_blocks = 64;
    std::size_t workers = 1;
    double stability_safety = 0.5;
    StochasticOptions stochastic;
    // Mean-field preparation of the initial state.
    double relax_t_max = 3000.0;
    double relax_tol = 1e-8;
    HysteresisOptions hysteresis;

    double effective_burn_in() const { return burn_in > 0.0 ? burn_in : 10.0 / params.gamma; }
    double effective_floor() const { return decorrelation_floor > 0.0 ? decorrelation_floor : 2.0 / params.gamma; }
    double effective_interval() const { return sample_interval > 0.0 ? sample_interval : effective_floor(); }

    void validate() const {
        params.validate();
        grid.check_time_step(params.kinetic, stability_safety);
        if (samples_per_realization == 0) throw ConfigError("twa: samples_per_realization must be >= 1");
        if (effective_interval() < effective_floor() * (1.0 - 1e-12))
            throw ConfigError("twa: sample_interval below the decorrelation floor");
        if (n_blocks == 0) throw ConfigError("twa: n_blocks must be >= 1");
        if (workers == 0) throw ConfigError("twa: workers must be >= 1");
        if (n_realizations > 0xffffffffULL) throw ConfigError("twa: at most 2^32 realizations");
    }
};

/// Accumulators indexed by realization modulo the block count. Realizations
/// are committed in index order, so the state depends only on (config, seed).
struct BlockedAccumulator {
    std::vector<CorrelationAccumulator> blocks;
    std::uint64_t next_realization = 0;
    std::uint64_t failed = 0;

    BlockedAccumulator() = default;
    BlockedAccumulator(const Grid& grid, std::size_t n_blocks, std::size_t decimation = 1) {
        blocks.reserve(n_blocks);
        for (std::size_t b = 0; b < n_blocks; ++b) blocks.emplace_back(grid, decimation);
    }

    CorrelationAccumulator pooled() const {
        CorrelationAccumulator out = blocks.front();
        for (std::size_t b = 1; b < blocks.size(); ++b) out.merge(blocks[b]);
        return out;
    }

    std::uint64_t samples() const {
        std::uint64_t n = 0;
        for (const auto& b : blocks) n += b.count();
        return n;
    }

    bool operator==(const BlockedAccumulator&) const = default;
};

inline constexpr char checkpoint_magic[8] = {'T', 'W', 'A', 'C', 'K', 'P', '1', '\0'};

/// Writes blocks and the realization cursor; atomic via rename.
inline void save_checkpoint(const std::filesystem::path& path, const BlockedAccumulator& acc,
                            std::uint64_t config_hash) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write checkpoint " + tmp);
        out.write(checkpoint_magic, sizeof checkpoint_magic);
        const std::uint64_t header[4] = {config_hash, acc.next_realization, acc.failed, acc.blocks.size()};
        out.write(reinterpret_cast<const char*>(header), sizeof header);
        for (const auto& b : acc.blocks) b.write(out);
        if (!out) throw Error("failed writing checkpoint " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

/// Restores into acc, which must already have the right layout.
inline void load_checkpoint(const std::filesystem::path& path, BlockedAccumulator& acc, std::uint64_t config_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    char magic[8] = {};
    in.read(magic, sizeof magic);
    if (!in || !std::equal(magic, magic + 8, checkpoint_magic)) throw Error("not a checkpoint: " + path.string());
    std::uint64_t header[4] = {};
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (!in) throw Error("truncated checkpoint " + path.string());
    if (header[0] != config_hash) throw ConfigError("checkpoint was written for a different configuration");
    if (header[3] != acc.blocks.size()) throw ConfigError("checkpoint block count differs from configuration");
    acc.next_realization = header[1];
    acc.failed = header[2];
    for (auto& b : acc.blocks) b.read(in);
}

struct RealizationStatus {
    std::uint64_t index = 0;
    bool ok = true;
    std::string error;
};

struct EnsembleReport {
    std::uint64_t realizations = 0;  ///< completed in this call
    std::uint64_t samples = 0;       ///< pushed in this call
    std::uint64_t failed = 0;
    double wall_seconds = 0.0;
    std::vector<RealizationStatus> status;
    std::optional<double> horizon;   ///< of the mean-field initial state
};

struct EnsembleOptions {
    std::optional<std::filesystem::path> checkpoint;
    std::uint64_t checkpoint_every = 1000;  ///< realizations
    std::uint64_t config_hash = 0;
    std::function<void(std::uint64_t done, std::uint64_t total)> progress;
};

/// Mean-field starting point for the ensemble.
inline MeanFieldSolution prepare_initial_state(const TwaConfig& cfg) {
    RelaxOptions ro;
    ro.hysteresis = cfg.hysteresis;
    ro.absorber = cfg.absorber;
    ro.stability_safety = cfg.stability_safety;
    return relax_to_steady(FieldState(cfg.grid), cfg.params, cfg.pump, cfg.potential, cfg.relax_t_max, cfg.relax_tol,
                           ro);
}

namespace detail {

struct Worker {
    StochasticStepper stepper;
    CorrelationAccumulator local;
    std::vector<cplx> psi;
    RealizationStatus status;

    Worker(const TwaConfig& cfg, std::size_t decimation)
        : stepper(cfg.grid, cfg.params, cfg.potential, cfg.absorber, cfg.stochastic),
          local(cfg.grid, decimation), psi(cfg.grid.size()) {}

    void run(const TwaConfig& cfg, std::span<const cplx> initial, std::span<const cplx> pump, std::uint64_t r) {
        local.clear();
        status = {r, true, {}};
        const auto& grid = cfg.grid;
        NoiseStream noise(cfg.seed, static_cast<std::uint32_t>(r), grid.size());
        std::copy(initial.begin(), initial.end(), psi.begin());
        if (cfg.stochastic.noise) add_vacuum_noise(psi, grid, noise);
        const auto burn = static_cast<std::uint64_t>(std::llround(cfg.effective_burn_in() / grid.dt()));
        const auto interval =
            std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(cfg.effective_interval() / grid.dt())));
        try {
            for (std::uint64_t s = 0; s < burn; ++s) stepper.step(psi, pump, noise);
            local.accumulate(psi);
            for (std::uint64_t k = 1; k < cfg.samples_per_realization; ++k) {
                for (std::uint64_t s = 0; s < interval; ++s) stepper.step(psi, pump, noise);
                local.accumulate(psi);
            }
        } catch (const NonFinite& e) {
            status.ok = false;
            status.error = "realization " + std::to_string(r) + ": " + e.what();
            local.clear();
        }
    }
};

}  // namespace detail

/// Runs realizations [sink.next_realization, cfg.n_realizations). Realizations
/// are computed in waves of cfg.workers and committed in index order.
inline EnsembleReport run_ensemble(const TwaConfig& cfg, BlockedAccumulator& sink, std::span<const cplx> initial,
                                   const EnsembleOptions& opt = {}) {
    cfg.validate();
    if (sink.blocks.empty()) throw ConfigError("twa: accumulator has no blocks");
    if (sink.blocks.front().grid().size() != cfg.grid.size())
        throw GridMismatch(cfg.grid.size(), sink.blocks.front().grid().size());
    if (initial.size() != cfg.grid.size()) throw GridMismatch(cfg.grid.size(), initial.size());

    const auto t0 = std::chrono::steady_clock::now();
    EnsembleReport report;
    if (sink.next_realization >= cfg.n_realizations) return report;

    const auto pump = cfg.pump.sample(cfg.grid);
    const std::size_t decimation = sink.blocks.front().decimation();
    std::vector<std::unique_ptr<detail::Worker>> workers;
    for (std::size_t w = 0; w < cfg.workers; ++w) workers.push_back(std::make_unique<detail::Worker>(cfg, decimation));

    std::uint64_t since_checkpoint = 0;
    while (sink.next_realization < cfg.n_realizations) {
        const std::uint64_t first = sink.next_realization;
        const std::uint64_t count = std::min<std::uint64_t>(cfg.workers, cfg.n_realizations - first);
        if (count == 1) {
            workers[0]->run(cfg, initial, pump, first);
        } else {
            std::vector<std::thread> threads;
            for (std::uint64_t w = 0; w < count; ++w)
                threads.emplace_back([&, w] { workers[w]->run(cfg, initial, pump, first + w); });
            for (auto& t : threads) t.join();
        }
        for (std::uint64_t w = 0; w < count; ++w) {
            auto& wk = *workers[w];
            const std::uint64_t r = first + w;
            if (wk.status.ok) {
                sink.blocks[r % sink.blocks.size()].merge(wk.local);
                report.samples += wk.local.count();
            } else {
                ++sink.failed;
                ++report.failed;
            }
            report.status.push_back(wk.status);
            ++report.realizations;
        }
        sink.next_realization = first + count;
        since_checkpoint += count;
        if (opt.checkpoint && since_checkpoint >= opt.checkpoint_every) {
            save_checkpoint(*opt.checkpoint, sink, opt.config_hash);
            since_checkpoint = 0;
        }
        if (opt.progress) opt.progress(sink.next_realization, cfg.n_realizations);
    }
    if (opt.checkpoint) save_checkpoint(*opt.checkpoint, sink, opt.config_hash);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace polariton
