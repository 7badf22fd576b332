#pragma once

// Bootstrap calibration of the stability-test threshold tau(t, i).

#include "baws/error.hpp"
#include "baws/estimators.hpp"
#include "baws/random.hpp"
#include "baws/types.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace baws {

enum class ResampleMode { IID, Block };

/// PCER tests every pair at level beta; FWER applies the Bonferroni level per candidate.
enum class ErrorControl { PCER, FWER };

struct BootstrapConfig {
    double beta = 0.9;
    std::size_t replications = 500;
    ResampleMode mode = ResampleMode::IID;
    double block_constant = 1.0;  ///< c in l_i = c * ceil(i^(1/3))
    std::uint64_t seed = 0;
    ErrorControl control = ErrorControl::PCER;

    void validate() const {
        require_level(beta, "beta");
        if (replications < 1) throw ParameterError("bootstrap replications must be >= 1");
        if (!(block_constant > 0.0) || !std::isfinite(block_constant)) {
            throw ParameterError("block constant must be positive");
        }
    }
};

struct BlockShape {
    std::size_t length;  ///< l_i
    std::size_t count;   ///< m_i = floor(i / l_i)
};

inline std::size_t ceil_cube_root(std::size_t i) {
    auto r = static_cast<std::size_t>(std::cbrt(static_cast<double>(i)));
    while (r * r * r < i) ++r;
    while (r > 1 && (r - 1) * (r - 1) * (r - 1) >= i) --r;
    return std::max<std::size_t>(r, 1);
}

/// l_i = max(1, round-half-up(c * ceil(i^(1/3)))) and m_i = floor(i / l_i).
inline BlockShape block_length(std::size_t i, double c) {
    if (i < 1) throw DomainError("block length needs a window of length >= 1");
    if (!(c > 0.0)) throw ParameterError("block constant must be positive");
    const double scaled = c * static_cast<double>(ceil_cube_root(i));
    const auto l = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(scaled + 0.5)));
    return {l, i / l};
}

template <class Rng>
std::vector<double> iid_resample(std::span<const double> window, Rng& rng) {
    if (window.empty()) throw DomainError("cannot resample an empty window");
    std::vector<double> out(window.size());
    for (double& x : out) x = window[uniform_index(rng, window.size())];
    return out;
}

/// Concatenate floor(i / l) blocks drawn with replacement from the i - l + 1 contiguous
/// blocks of length l. Output length is m * l (no padding to i).
template <class Rng>
std::vector<double> block_resample(std::span<const double> window, std::size_t l, Rng& rng) {
    if (l < 1 || l > window.size()) throw DomainError("block length must lie in [1, window length]");
    const std::size_t m = window.size() / l;
    const std::size_t starts = window.size() - l + 1;
    std::vector<double> out;
    out.reserve(m * l);
    for (std::size_t b = 0; b < m; ++b) {
        const std::size_t s = uniform_index(rng, starts);
        out.insert(out.end(), window.begin() + static_cast<std::ptrdiff_t>(s),
                   window.begin() + static_cast<std::ptrdiff_t>(s + l));
    }
    return out;
}

/// Type-1 empirical quantile: the ceil(beta * B)-th order statistic.
inline double empirical_quantile(std::span<const double> values, double beta) {
    require_level(beta, "beta");
    if (values.empty()) throw DomainError("quantile of an empty sample");
    std::vector<double> buf(values.begin(), values.end());
    const std::size_t j = var_order_index(buf.size(), beta);
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(j - 1), buf.end());
    return buf[j - 1];
}

struct ThresholdValue {
    double tau = 0.0;
    std::size_t window = 0;
    std::size_t replications = 0;
    std::vector<double> sorted_gaps;  ///< kept so other levels can be read without re-bootstrapping

    double quantile(double beta) const {
        require_level(beta, "beta");
        return sorted_gaps[var_order_index(sorted_gaps.size(), beta) - 1];
    }
};

/// State shared by bootstrap calls whose windows are all subspans of one series, such as
/// the suffix windows of a backtest. Holds sorted copies of every length-l block, which
/// depend only on the block's absolute position. The series must not change while in use.
class BootstrapWorkspace {
public:
    explicit BootstrapWorkspace(std::span<const double> series) : series_(series) {}

    /// Offset of `window` within the series, or nullopt if it is not a subspan.
    std::optional<std::size_t> offset_of(std::span<const double> window) const {
        const auto* lo = series_.data();
        const auto* hi = lo + series_.size();
        if (window.data() < lo || window.data() + window.size() > hi) return std::nullopt;
        return static_cast<std::size_t>(window.data() - lo);
    }

    /// Sorted blocks for absolute starts [0, end), concatenated, l values each.
    const std::vector<double>& sorted_blocks(std::size_t l, bool descending, std::size_t end) {
        auto& blocks = cache_[{l, descending}];
        for (std::size_t s = blocks.size() / l; s < end; ++s) {
            const auto first = blocks.insert(blocks.end(), series_.begin() + static_cast<std::ptrdiff_t>(s),
                                             series_.begin() + static_cast<std::ptrdiff_t>(s + l));
            if (descending) {
                std::sort(first, blocks.end(), std::greater<>{});
            } else {
                std::sort(first, blocks.end());
            }
        }
        return blocks;
    }

private:
    std::span<const double> series_;
    std::map<std::pair<std::size_t, bool>, std::vector<double>> cache_;
};

namespace detail {

// Bootstrap estimator theta^(b) for one replication.
//
// For VaR under i.i.d. resampling the j-th order statistic of i uniform draws from the
// sorted window is sorted[floor(i * U)] with U ~ Beta(j, i - j + 1); this is exact in
// distribution and avoids materializing the resample.
class ReplicationFitter {
public:
    ReplicationFitter(std::span<const double> window, const SortedWindow& sorted,
                      const ForecastTarget& target, const BootstrapConfig& cfg,
                      BootstrapWorkspace* workspace = nullptr)
        : window_(window), sorted_(sorted), target_(target), cfg_(cfg), workspace_(workspace) {
        if (cfg.mode == ResampleMode::Block) {
            shape_ = block_length(window.size(), cfg.block_constant);
            if (shape_.length > window.size() || shape_.count < 1) {
                throw DomainError("block length exceeds the window");
            }
            if (std::holds_alternative<Mean>(target)) {
                prefix_.assign(window.size() + 1, 0.0);
                for (std::size_t i = 0; i < window.size(); ++i) prefix_[i + 1] = prefix_[i] + window[i];
            }
        }
    }

    template <class Rng>
    ParamVector operator()(Rng& rng) {
        const std::size_t i = window_.size();
        if (std::holds_alternative<Mean>(target_)) {
            double sum = 0.0;
            std::size_t n = i;
            if (cfg_.mode == ResampleMode::IID) {
                for (std::size_t b = 0; b < i; ++b) sum += window_[uniform_index(rng, i)];
            } else {
                const std::size_t starts = i - shape_.length + 1;
                for (std::size_t b = 0; b < shape_.count; ++b) {
                    const std::size_t s = uniform_index(rng, starts);
                    sum += prefix_[s + shape_.length] - prefix_[s];
                }
                n = shape_.count * shape_.length;
            }
            return ParamVector(sum / static_cast<double>(n));
        }
        if (const auto* var = std::get_if<VaR>(&target_)) {
            if (cfg_.mode == ResampleMode::IID) {
                const std::size_t j = var_order_index(i, var->alpha);
                std::gamma_distribution<double> lower(static_cast<double>(j), 1.0);
                std::gamma_distribution<double> upper(static_cast<double>(i - j + 1), 1.0);
                const double a = lower(rng);
                const double u = a / (a + upper(rng));
                const auto idx = std::min(i - 1, static_cast<std::size_t>(u * static_cast<double>(i)));
                return ParamVector(sorted_.values()[idx]);
            }
            return ParamVector(block_order_statistic(rng, var->alpha));
        }
        if (cfg_.mode == ResampleMode::IID) {
            buffer_.resize(i);
            for (double& x : buffer_) x = window_[uniform_index(rng, i)];
        } else {
            fill_block(rng);
        }
        return SortedWindow(buffer_).fit(target_).theta;
    }

private:
    // j-th order statistic of a block resample without materializing it. Blocks are kept
    // sorted from the nearer tail, so only elements at least as extreme as a cutoff taken
    // from the window are gathered; if fewer than the needed rank pass the cutoff the
    // resample is built in full.
    template <class Rng>
    double block_order_statistic(Rng& rng, double alpha) {
        const std::size_t l = shape_.length;
        const std::size_t i = window_.size();
        const std::size_t starts = i - l + 1;
        const std::size_t n = shape_.count * l;
        const std::size_t j = var_order_index(n, alpha);
        const bool from_top = n - j + 1 < j;
        const std::size_t rank = from_top ? n - j + 1 : j;
        if (!blocks_) {
            const auto offset = workspace_ ? workspace_->offset_of(window_) : std::nullopt;
            if (offset) {
                blocks_ = workspace_->sorted_blocks(l, from_top, *offset + starts).data() + *offset * l;
            } else {
                BootstrapWorkspace local(window_);
                local_blocks_ = local.sorted_blocks(l, from_top, starts);
                blocks_ = local_blocks_.data();
            }
            // Margin of a few standard deviations of the (block-clumped) tail count.
            const double r = static_cast<double>(rank);
            const auto depth = std::min<std::size_t>(
                i, rank + l + static_cast<std::size_t>(std::ceil(4.0 * std::sqrt(r * static_cast<double>(l)))));
            const auto& v = sorted_.values();
            cutoff_ = from_top ? v[i - depth] : v[depth - 1];
        }
        picks_.resize(shape_.count);
        for (std::size_t& s : picks_) s = uniform_index(rng, starts);
        const std::size_t count = from_top ? gather_tail<true>() : gather_tail<false>();
        if (count < rank) {
            buffer_.clear();
            for (std::size_t s : picks_) {
                buffer_.insert(buffer_.end(), window_.begin() + static_cast<std::ptrdiff_t>(s),
                               window_.begin() + static_cast<std::ptrdiff_t>(s + l));
            }
            std::nth_element(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(j - 1), buffer_.end());
            return buffer_[j - 1];
        }
        double* first = tail_.data();
        double* nth = first + (rank - 1);
        if (from_top) {
            std::nth_element(first, nth, first + count, std::greater<>{});
        } else {
            std::nth_element(first, nth, first + count);
        }
        return *nth;
    }

    // Copies the elements of the picked blocks that pass the cutoff into tail_; returns the count.
    template <bool FromTop>
    std::size_t gather_tail() {
        const std::size_t l = shape_.length;
        if (tail_.size() < shape_.count * l) tail_.resize(shape_.count * l);
        double* out = tail_.data();
        for (std::size_t s : picks_) {
            const double* x = blocks_ + s * l;
            const double* end = x + l;
            for (; x != end && (FromTop ? *x >= cutoff_ : *x <= cutoff_); ++x) *out++ = *x;
        }
        return static_cast<std::size_t>(out - tail_.data());
    }

    template <class Rng>
    void fill_block(Rng& rng) {
        const std::size_t l = shape_.length;
        const std::size_t starts = window_.size() - l + 1;
        buffer_.resize(shape_.count * l);
        auto out = buffer_.begin();
        for (std::size_t b = 0; b < shape_.count; ++b) {
            const std::size_t s = uniform_index(rng, starts);
            out = std::copy_n(window_.begin() + static_cast<std::ptrdiff_t>(s), l, out);
        }
    }

    std::span<const double> window_;
    const SortedWindow& sorted_;
    const ForecastTarget& target_;
    const BootstrapConfig& cfg_;
    BlockShape shape_{1, 1};
    std::vector<double> prefix_;
    std::vector<double> buffer_;
    BootstrapWorkspace* workspace_;
    const double* blocks_ = nullptr;
    std::vector<double> local_blocks_;
    std::vector<std::size_t> picks_;
    std::vector<double> tail_;
    double cutoff_ = 0.0;
};

}  // namespace detail

/// tau(t, i): beta-quantile over B replications of f_{t,i}(theta^(b)) - f_{t,i}(theta_hat),
/// both evaluated on the original window. Replication b draws from the stream keyed by
/// (seed, t, i, b), so the result does not depend on evaluation order.
inline ThresholdValue bootstrap_threshold(std::span<const double> window, const SortedWindow& sorted,
                                          const ParamVector& theta_hat, const ForecastTarget& target,
                                          const BootstrapConfig& cfg, std::uint64_t t = 0,
                                          BootstrapWorkspace* workspace = nullptr) {
    cfg.validate();
    validate(target);
    if (window.empty()) throw DomainError("bootstrap threshold of an empty window");
    const std::size_t i = window.size();
    const double base = sorted.score(target, theta_hat);

    detail::ReplicationFitter fitter(window, sorted, target, cfg, workspace);
    ThresholdValue out;
    out.window = i;
    out.replications = cfg.replications;
    out.sorted_gaps.assign(cfg.replications, 0.0);
    // a constant window resamples to itself, so every gap is exactly zero
    if (sorted.values().front() == sorted.values().back()) return out;
    for (std::size_t b = 0; b < cfg.replications; ++b) {
        auto rng = derive_stream({cfg.seed, t, i, b});
        const ParamVector theta_b = fitter(rng);
        const double gap = sorted.score(target, theta_b) - base;
        assert(gap >= -1e-9 * (1.0 + std::abs(base)));
        out.sorted_gaps[b] = std::max(gap, 0.0);
    }
    std::sort(out.sorted_gaps.begin(), out.sorted_gaps.end());
    out.tau = out.quantile(cfg.beta);
    return out;
}

inline ThresholdValue bootstrap_threshold(std::span<const double> window, const ForecastTarget& target,
                                          const BootstrapConfig& cfg, std::uint64_t t = 0) {
    if (window.empty()) throw DomainError("bootstrap threshold of an empty window");
    const SortedWindow sorted(window);
    return bootstrap_threshold(window, sorted, sorted.fit(target).theta, target, cfg, t);
}

}  // namespace baws
