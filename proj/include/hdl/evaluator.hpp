#pragma once

// Memoizing front end over a pair provider: each functional is computed once per
// (functional, parameter), so certificate batches sharing h^2, K, NC(delta), ... do
// not repeat quadrature. Not thread-safe; use one evaluator per worker.

#include <map>
#include <memory>
#include <optional>
#include <utility>

#include "hdl/conditions.hpp"
#include "hdl/discrepancy.hpp"
#include "hdl/pair.hpp"

namespace hdl {

template <class Pair>
class PairEvaluator {
public:
    explicit PairEvaluator(Pair pr) : pr_(std::move(pr)) {}

    const Pair& pair() const { return pr_; }

    const IntegralEstimate& h_sq() { return memo(Key::HSq, 0.0, [&] { return hellinger_sq(pr_); }); }
    const IntegralEstimate& kl() { return memo(Key::Kl, 0.0, [&] { return kl_divergence(pr_); }); }
    const IntegralEstimate& v_k(double k) { return memo(Key::Vk, k, [&] { return kl_variation(pr_, k, false); }); }
    const IntegralEstimate& v_k0(double k) { return memo(Key::Vk0, k, [&] { return kl_variation(pr_, k, true); }); }
    const IntegralEstimate& bern(double d) { return memo(Key::Bern, d, [&] { return bernstein_norm_sq(pr_, d); }); }
    const IntegralEstimate& conv(double d) { return memo(Key::Conv, d, [&] { return convenient_norm_sq(pr_, d); }); }
    const IntegralEstimate& nc(double d) { return memo(Key::Nc, d, [&] { return eval_nc(pr_, d); }); }
    const IntegralEstimate& lk(double k) { return memo(Key::Lk, k, [&] { return eval_lk(pr_, k); }); }
    const IntegralEstimate& ws(double d) { return memo(Key::Ws, d, [&] { return eval_ws(pr_, d); }); }
    const IntegralEstimate& fm() { return memo(Key::Fm, 0.0, [&] { return eval_fm(pr_); }); }

    const CmResult& cm() {
        if (!cm_) cm_ = eval_cm(pr_);
        return *cm_;
    }
    const UbValue& ub() {
        if (!ub_) ub_ = eval_ub(pr_);
        return *ub_;
    }

    /// Evaluator for (p0, (p0 + p)/2).
    PairEvaluator& mixture() {
        if (!mix_) mix_ = std::make_unique<PairEvaluator>(mixture_pair(pr_));
        return *mix_;
    }

private:
    enum class Key { HSq, Kl, Vk, Vk0, Bern, Conv, Nc, Lk, Ws, Fm };

    template <class F>
    const IntegralEstimate& memo(Key key, double param, F&& compute) {
        const auto k = std::make_pair(key, param);
        auto it = cache_.find(k);
        if (it == cache_.end()) it = cache_.emplace(k, compute()).first;
        return it->second;
    }

    Pair pr_;
    std::map<std::pair<Key, double>, IntegralEstimate> cache_;
    std::optional<CmResult> cm_;
    std::optional<UbValue> ub_;
    std::unique_ptr<PairEvaluator> mix_;
};

}  // namespace hdl
