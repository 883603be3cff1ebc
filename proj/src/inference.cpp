#include "vmar/inference.hpp"

#include <cmath>
#include <sstream>

#include "vmar/dist.hpp"
#include "vmar/errors.hpp"

namespace vmar {

namespace {

double lr_statistic(double ll_restricted, double ll_alternative) {
    double stat = -2.0 * (ll_restricted - ll_alternative);
    if (stat < 0.0) {
        const double slack = 1e-8 * std::max(1.0, std::abs(ll_alternative));
        if (stat < -slack) {
            std::ostringstream msg;
            msg << "negative LR statistic " << stat << " (restricted lnL " << ll_restricted
                << ", alternative lnL " << ll_alternative << "); nested starts did not dominate";
            throw InternalError(msg.str());
        }
        stat = 0.0;
    }
    return stat;
}

LrTest make_test(double stat, int df, double level) {
    if (!(level > 0.0 && level < 1.0)) throw StructuralError("test level must lie in (0,1)");
    LrTest t;
    t.stat = stat;
    t.df = df;
    t.pvalue = chi2_sf(stat, df);
    t.critical = chi2_quantile(level, df);
    t.reject = stat > t.critical;
    return t;
}

void require_same_order(const FitResult& a, const FitResult& b) {
    if (!(a.model.order == b.model.order) || a.T != b.T) {
        throw StructuralError("compared fits must share the panel and the model order");
    }
}

}  // namespace

LrTest lr_test(const FitResult& restricted, const FitResult& unrestricted, double level) {
    require_same_order(restricted, unrestricted);
    if (!restricted.restriction) throw StructuralError("lr_test needs a restricted fit");
    if (unrestricted.restriction) throw StructuralError("alternative must be unrestricted");
    const auto& o = restricted.model.order;
    return make_test(lr_statistic(restricted.loglik, unrestricted.loglik), rho(o.N, restricted.restriction->k, o.s),
                     level);
}

LrTest lr_test_nested(const FitResult& more_restricted, const FitResult& less_restricted, double level) {
    require_same_order(more_restricted, less_restricted);
    if (!more_restricted.restriction || !less_restricted.restriction) {
        throw StructuralError("nested test needs two restricted fits");
    }
    const auto& o = more_restricted.model.order;
    const int df = rho_nested(o.N, more_restricted.restriction->k, less_restricted.restriction->k, o.s);
    return make_test(lr_statistic(more_restricted.loglik, less_restricted.loglik), df, level);
}

InfoCriteria info_criteria(double loglik, int K, int T) {
    InfoCriteria ic;
    ic.K = K;
    const double lnT = std::log(static_cast<double>(T));
    ic.bic = K * lnT - 2.0 * loglik;
    ic.aic = 2.0 * K - 2.0 * loglik;
    ic.hqc = 2.0 * K * std::log(lnT) - 2.0 * loglik;
    return ic;
}

InfoCriteria info_criteria(const FitResult& fit) {
    const std::optional<int> k = fit.restriction ? std::optional<int>(fit.restriction->k) : std::nullopt;
    return info_criteria(fit.loglik, param_count(fit.model.order, k), fit.T);
}

std::string rank_label(int N, int null_k, std::optional<int> alt_l) {
    return std::to_string(N - null_k) + " vs " + std::to_string(alt_l ? N - *alt_l : N);
}

CBComparison compare(const FitResult& restricted, const FitResult& alternative, double level) {
    CBComparison row;
    if (!restricted.restriction) throw StructuralError("comparison needs a restricted null fit");
    const int N = restricted.model.order.N;
    row.null_k = restricted.restriction->k;
    if (alternative.restriction) row.alt_l = alternative.restriction->k;
    row.label = rank_label(N, row.null_k, row.alt_l);
    row.lr = row.alt_l ? lr_test_nested(restricted, alternative, level) : lr_test(restricted, alternative, level);
    // IC_r - IC_a = LR - df * penalty, written in that form so the identity holds exactly.
    const double lnT = std::log(static_cast<double>(restricted.T));
    const double df = row.lr.df;
    row.bic_delta = row.lr.stat - df * lnT;
    row.aic_delta = row.lr.stat - 2.0 * df;
    row.hqc_delta = row.lr.stat - 2.0 * df * std::log(lnT);
    row.ok = true;
    return row;
}

CBTestReport cb_scan(const TimeSeriesPanel& panel, const ModelOrder& order, const FitOptions& opts, double level) {
    order.validate();
    if (order.N < 2) throw StructuralError("common bubbles need N >= 2");
    if (order.s < 1) throw StructuralError("common bubbles need at least one lead");
    const int N = order.N;

    CBTestReport rep;
    rep.order = order;
    rep.T = panel.T();
    rep.level = level;
    rep.restricted.resize(static_cast<std::size_t>(N - 1));

    std::vector<MultiplicativeVMAR> seeds;
    for (int k = N - 1; k >= 1; --k) {
        CBFitSummary summary;
        summary.k = k;
        FitOptions fo = opts;
        fo.extra_starts.insert(fo.extra_starts.end(), seeds.begin(), seeds.end());
        try {
            FitResult f = fit(panel, order, k, fo);
            summary.ok = true;
            summary.loglik = f.loglik;
            summary.ic = info_criteria(f);
            summary.K = summary.ic.K;
            summary.converged = f.converged;
            summary.start_index = f.start_index;
            seeds.push_back(f.model);
            rep.restricted[static_cast<std::size_t>(k - 1)] = std::move(f);
        } catch (const EstimationError& e) {
            summary.error = e.what();
        }
        rep.fits.push_back(std::move(summary));
    }
    {
        CBFitSummary summary;
        FitOptions fo = opts;
        fo.extra_starts.insert(fo.extra_starts.end(), seeds.begin(), seeds.end());
        try {
            FitResult f = fit(panel, order, std::nullopt, fo);
            summary.ok = true;
            summary.loglik = f.loglik;
            summary.ic = info_criteria(f);
            summary.K = summary.ic.K;
            summary.converged = f.converged;
            summary.start_index = f.start_index;
            rep.unrestricted = std::move(f);
        } catch (const EstimationError& e) {
            summary.error = e.what();
        }
        rep.fits.push_back(std::move(summary));
    }

    auto add_row = [&](int k, std::optional<int> l) {
        const auto& null_fit = rep.restricted[static_cast<std::size_t>(k - 1)];
        const auto& alt_fit = l ? rep.restricted[static_cast<std::size_t>(*l - 1)] : rep.unrestricted;
        if (null_fit && alt_fit) {
            rep.rows.push_back(compare(*null_fit, *alt_fit, level));
            return;
        }
        CBComparison row;
        row.null_k = k;
        row.alt_l = l;
        row.label = rank_label(N, k, l);
        row.error = "component fit failed";
        rep.rows.push_back(std::move(row));
    };
    for (int k = 1; k < N; ++k) add_row(k, std::nullopt);
    for (int k = 2; k < N; ++k)
        for (int l = 1; l < k; ++l) add_row(k, l);
    return rep;
}

}  // namespace vmar
