#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cusplab/geometry.hpp"
#include "cusplab/operators.hpp"

namespace cusplab {

namespace rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32-10 block function.
Counter philox4x32(Counter ctr, Key key);

// Counter-based stream for one (seed, path) pair; independent of thread layout.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t path);
    double uniform();  // in (0, 1)
    double normal();   // Box-Muller

private:
    void refill();
    Key key_;
    std::uint64_t path_;
    std::uint64_t block_ = 0;
    Counter buf_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rng

struct SimConfig {
    double step = 1e-4;
    long max_steps = 2'000'000;
    long paths = 1000;
    std::uint64_t seed = 1;
    bool step_refinement_near_boundary = true;
    bool bisect_exit = true;
    // Within half a base step's spread of a spine much thinner than that distance,
    // replace the Euler step by the exact radial hitting probability of the spine.
    bool thin_spine_jumps = true;
    double boundary_tol = 1e-10;
    int threads = 0;  // 0 = hardware concurrency
};

struct ExitSample {
    Point exit_point;
    double exit_time = 0.0;
    bool censored = false;
    BoundaryClass boundary_class = BoundaryClass::NotBoundary;
    long steps = 0;
};

// One Euler-Maruyama path from start, using the stream of path index `path`.
ExitSample simulate_exit(const CuspDomain& domain, const LambdaField& field, std::span<const double> start,
                         const SimConfig& cfg, std::uint64_t path = 0);

// cfg.paths independent paths; identical output for any thread count.
std::vector<ExitSample> simulate_paths(const CuspDomain& domain, const LambdaField& field,
                                       std::span<const double> start, const SimConfig& cfg);

struct MeasureEstimate {
    double mean = 0.0;
    double half_width_95 = 0.0;
    long n_effective = 0;
    double censoring_rate = 0.0;
};

// Mean and 95% half width over the non-censored samples; ExcessCensoring at >= 5% censoring.
MeasureEstimate summarize(const std::vector<ExitSample>& samples,
                          const std::function<double(const ExitSample&)>& f);

MeasureEstimate harmonic_measure(const CuspDomain& domain, const LambdaField& field, std::span<const double> start,
                                 const std::function<double(std::span<const double>)>& g, const SimConfig& cfg);

MeasureEstimate exit_time_mean(const CuspDomain& domain, const LambdaField& field, std::span<const double> start,
                               const SimConfig& cfg);

struct CovarianceCheck {
    Eigen::MatrixXd sample;    // sample covariance of one-step increments
    Eigen::MatrixXd expected;  // 2 a(x) dt
    Eigen::MatrixXd half_width_95;
    double max_z = 0.0;        // largest |sample - expected| / standard error
    bool within_ci = false;    // every entry within its 95% half width
};

CovarianceCheck increment_covariance(const LambdaField& field, std::span<const double> x, double dt, long n,
                                     std::uint64_t seed);

enum class ProbeVerdict { ConsistentWithRegular, ConsistentWithIrregular, Inconclusive };
const char* to_string(ProbeVerdict v);

struct ProbeRow {
    Point start;
    double distance = 0.0;
    MeasureEstimate estimate;
    double gap = 0.0;  // |g(0) - mean|
};

struct EscapeRow {
    double t = 0.0;
    double frequency = 0.0;  // fraction of paths from the origin leaving G before time t
    double half_width_95 = 0.0;
};

struct ProbeReport {
    std::vector<ProbeRow> rows;
    std::vector<EscapeRow> escape;
    double g0 = 0.0;
    ProbeVerdict verdict = ProbeVerdict::Inconclusive;
    std::string reason;
    std::string note;
};

// Harmonic measure means along starts approaching the origin, plus escape
// frequencies of paths started at the origin. Evidence only.
ProbeReport regularity_probe(const CuspDomain& domain, const LambdaField& field, const std::vector<Point>& starts,
                             const std::function<double(std::span<const double>)>& g, double g0,
                             const SimConfig& cfg, const std::vector<double>& escape_times = {});

void write_samples_csv(std::ostream& os, const std::vector<ExitSample>& samples);

}  // namespace cusplab
