#pragma once

#include <cstddef>

namespace ecdnn {

/// Counts model-sized buffers (networks held for forward evaluation) and
/// running output sums live in one worker's scope. Not thread-safe: each
/// worker owns its own probe.
class MemoryProbe {
public:
    void acquire_model() { peak_models_ = max(peak_models_, ++live_models_); }
    void release_model() { --live_models_; }
    void acquire_sum() { peak_sums_ = max(peak_sums_, ++live_sums_); }
    void release_sum() { --live_sums_; }

    std::size_t live_models() const { return live_models_; }
    std::size_t peak_models() const { return peak_models_; }
    std::size_t peak_sums() const { return peak_sums_; }

    void reset_peaks() {
        peak_models_ = live_models_;
        peak_sums_ = live_sums_;
    }

private:
    static std::size_t max(std::size_t a, std::size_t b) { return a > b ? a : b; }
    std::size_t live_models_ = 0;
    std::size_t peak_models_ = 0;
    std::size_t live_sums_ = 0;
    std::size_t peak_sums_ = 0;
};

/// RAII hold on one model buffer (no-op with a null probe).
class ModelHold {
public:
    explicit ModelHold(MemoryProbe* probe) : probe_(probe) {
        if (probe_) probe_->acquire_model();
    }
    ~ModelHold() {
        if (probe_) probe_->release_model();
    }
    ModelHold(const ModelHold&) = delete;
    ModelHold& operator=(const ModelHold&) = delete;

private:
    MemoryProbe* probe_;
};

class SumHold {
public:
    explicit SumHold(MemoryProbe* probe) : probe_(probe) {
        if (probe_) probe_->acquire_sum();
    }
    ~SumHold() {
        if (probe_) probe_->release_sum();
    }
    SumHold(const SumHold&) = delete;
    SumHold& operator=(const SumHold&) = delete;

private:
    MemoryProbe* probe_;
};

}  // namespace ecdnn
