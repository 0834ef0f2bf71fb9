#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coreg/bench.hpp"
#include "coreg/csv.hpp"
#include "coreg/factor.hpp"
#include "coreg/inference.hpp"
#include "coreg/network.hpp"
#include "coreg/simulate.hpp"

namespace coreg {

using json = nlohmann::json;

inline MethodTag parse_method(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (name == "ols") return MethodTag::OLS;
    if (name == "coreg") return MethodTag::CoReg;
    if (name == "svd" || name == "svdfactor") return MethodTag::SvdFactor;
    throw invalid_input("unknown method '" + name +
                        "'; valid methods: ols, svd, coreg");
}

inline std::vector<MethodTag> parse_methods(const std::vector<std::string>& names) {
    std::vector<MethodTag> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(parse_method(n));
    return out;
}

// ---- partitions and factor models -----------------------------------------

inline json partition_to_json(const ModulePartition& part) {
    return json{{"lambda", part.lambda},
                {"objective", part.objective_value},
                {"modules", part.modules},
                {"singletons", part.singletons}};
}

inline json selection_to_json(const SelectionResult& sel) {
    json breakdown = json::array();
    for (const auto& s : sel.breakdown) {
        json row{{"lambda", s.lambda}, {"K", s.module_count}};
        if (s.usable) {
            row["reconstruction"] = s.reconstruction;
            row["nuclear"] = s.nuclear;
            row["score"] = s.total;
        } else {
            row["score"] = nullptr;
        }
        breakdown.push_back(std::move(row));
    }
    std::vector<int> sizes;
    for (const auto& m : sel.model.loadings.partition.modules)
        sizes.push_back(static_cast<int>(m.size()));
    json sigma_f = json::array();
    const Eigen::MatrixXd& sf = sel.model.sigma_f.matrix();
    for (Index i = 0; i < sf.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < sf.cols(); ++j) row.push_back(sf(i, j));
        sigma_f.push_back(std::move(row));
    }
    return json{{"lambda_star", sel.lambda_star},
                {"K", sel.model.loadings.k()},
                {"module_sizes", sizes},
                {"sigma_F", sigma_f},
                {"score_breakdown", breakdown},
                {"partition", partition_to_json(sel.model.loadings.partition)}};
}

// ---- inference tables ------------------------------------------------------

inline std::string inference_to_csv(const InferenceResult& res) {
    std::ostringstream out;
    out << "outcome,predictor,estimate,std_error,t_stat,p_value,p_adjusted,"
           "rejected,degenerate\n";
    const Index p = res.n_outcomes();
    const Index q = static_cast<Index>(res.predictor_names.size());
    for (Index m = 0; m < q; ++m) {
        for (Index l = 0; l < p; ++l) {
            const InferenceEntry& e = res.at(l, m);
            out << res.outcome_names[l] << ',' << res.predictor_names[m] << ','
                << format_double(e.estimate) << ',' << format_double(e.std_error)
                << ',' << format_double(e.t_stat) << ','
                << format_double(e.p_value) << ',' << format_double(e.adjusted_p)
                << ',' << (e.rejected ? 1 : 0) << ',' << (e.degenerate ? 1 : 0)
                << '\n';
        }
    }
    return out.str();
}

inline json inference_summary_json(const InferenceResult& res) {
    const Index p = res.n_outcomes();
    json predictors = json::array();
    for (std::size_t m = 0; m < res.predictor_names.size(); ++m) {
        int rejections = 0;
        std::vector<double> pv;
        pv.reserve(p);
        for (Index l = 0; l < p; ++l) {
            const auto& e = res.at(l, static_cast<Index>(m));
            rejections += e.rejected ? 1 : 0;
            pv.push_back(e.p_value);
        }
        json entry{{"predictor", res.predictor_names[m]},
                   {"rejections", rejections},
                   {"n_tests", static_cast<int>(p)}};
        if (pv.size() >= 20)
            entry["pi0"] = storey_pi0(pv);
        else
            entry["pi0"] = nullptr;
        predictors.push_back(std::move(entry));
    }
    return json{{"method", method_name(res.method)},
                {"alpha", res.alpha},
                {"n_outcomes", static_cast<int>(p)},
                {"predictors", predictors}};
}

// ---- scenario specs --------------------------------------------------------

inline BlockSigmaSpec block_sigma_from_json(const json& j) {
    BlockSigmaSpec spec;
    spec.block_sizes = j.at("blocks").get<std::vector<int>>();
    spec.block_mean_corr = j.at("block_mean_corr").get<std::vector<double>>();
    spec.within_block_sd = j.value("within_block_sd", 0.02);
    spec.n_singletons = j.value("n_singletons", 0);
    spec.noise_scale = j.value("sigma2", 1.0);
    if (j.contains("inter_block")) {
        for (const auto& ib : j.at("inter_block"))
            spec.inter_block.push_back({ib.at("i").get<int>(),
                                        ib.at("j").get<int>(),
                                        ib.at("corr").get<double>()});
    }
    return spec;
}

inline json block_sigma_to_json(const BlockSigmaSpec& spec) {
    json inter = json::array();
    for (const auto& ib : spec.inter_block)
        inter.push_back(json{{"i", ib.block_i}, {"j", ib.block_j}, {"corr", ib.corr}});
    return json{{"blocks", spec.block_sizes},
                {"block_mean_corr", spec.block_mean_corr},
                {"within_block_sd", spec.within_block_sd},
                {"inter_block", inter},
                {"n_singletons", spec.n_singletons},
                {"sigma2", spec.noise_scale}};
}

inline ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec spec;
    spec.sigma_spec = block_sigma_from_json(j);
    spec.n = j.at("n").get<int>();
    spec.q = j.value("q", 2);
    spec.n_true_signals = j.value("n_true_signals", 100);
    spec.effect_size = j.value("effect_size", 0.3);
    spec.n_replications = j.value("replications", 100);
    spec.alpha = j.value("alpha", 0.05);
    spec.master_seed = j.value("seed", static_cast<std::uint64_t>(20250810));
    if (j.contains("truth_seed"))
        spec.truth_seed = j.at("truth_seed").get<std::uint64_t>();
    spec.validate();
    return spec;
}

inline json scenario_to_json(const ScenarioSpec& spec) {
    json j = block_sigma_to_json(spec.sigma_spec);
    j["n"] = spec.n;
    j["q"] = spec.q;
    j["n_true_signals"] = spec.n_true_signals;
    j["effect_size"] = spec.effect_size;
    j["replications"] = spec.n_replications;
    j["alpha"] = spec.alpha;
    j["seed"] = spec.master_seed;
    if (spec.truth_seed) j["truth_seed"] = *spec.truth_seed;
    return j;
}

// ---- scenario reports --------------------------------------------------

namespace detail {

inline json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace detail

inline json aggregate_to_json(const MethodAggregate& agg) {
    auto stat = [](double mean, double sd) {
        return json{{"mean", detail::finite_or_null(mean)},
                    {"sd", detail::finite_or_null(sd)}};
    };
    return json{{"method", method_name(agg.method)},
                {"replications_ok", agg.n_success},
                {"replications_failed", agg.n_failed},
                {"sensitivity", stat(agg.mean_sensitivity, agg.sd_sensitivity)},
                {"sensitivity_defined", agg.sensitivity_defined_count},
                {"specificity", stat(agg.mean_specificity, agg.sd_specificity)},
                {"f1", stat(agg.mean_f1, agg.sd_f1)},
                {"fdr", stat(agg.mean_fdr, agg.sd_fdr)},
                {"auc", stat(agg.mean_auc, agg.sd_auc)},
                {"fpr", detail::finite_or_null(agg.mean_fpr)},
                {"mean_seconds", agg.mean_seconds}};
}

inline json scenario_report_to_json(const ScenarioReport& report) {
    json methods = json::array();
    for (const auto& agg : report.aggregates)
        methods.push_back(aggregate_to_json(agg));
    return json{{"scenario", scenario_to_json(report.spec)},
                {"methods", methods}};
}

inline std::string scenario_rows_to_csv(const ScenarioReport& report) {
    std::ostringstream out;
    out << "replication,method,sensitivity,specificity,f1,fdr,auc,tp,fp,fn,tn,"
           "seconds,failed,error\n";
    auto sanitize = [](std::string s) {
        std::replace(s.begin(), s.end(), ',', ';');
        std::replace(s.begin(), s.end(), '\n', ' ');
        return s;
    };
    for (const auto& row : report.rows) {
        out << row.replication << ',' << method_name(row.method) << ',';
        if (row.failed) {
            out << ",,,,,,,,," << format_double(row.seconds) << ",1,"
                << sanitize(row.error) << '\n';
            continue;
        }
        const MetricsSummary& m = row.metrics;
        out << (m.sensitivity_defined ? format_double(m.sensitivity) : "") << ','
            << format_double(m.specificity) << ',' << format_double(m.f1) << ','
            << format_double(m.fdr) << ',' << format_double(m.auc) << ',' << m.tp
            << ',' << m.fp << ',' << m.fn << ',' << m.tn << ','
            << format_double(row.seconds) << ",0,\n";
    }
    return out.str();
}

inline std::string mean_roc_to_csv(const MethodAggregate& agg) {
    std::ostringstream out;
    out << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : agg.mean_roc)
        out << format_double(fpr) << ',' << format_double(tpr) << '\n';
    return out.str();
}

inline json replicability_report_to_json(const ReplicabilityReport& report) {
    json methods = json::array();
    for (const auto& agg : report.aggregates) {
        methods.push_back(json{{"method", method_name(agg.method)},
                               {"replications_ok", agg.n_success},
                               {"replications_failed", agg.n_failed},
                               {"mean_tp_dataset1", agg.mean_tp1},
                               {"mean_tp_dataset2", agg.mean_tp2},
                               {"mean_only_dataset1", agg.mean_only1},
                               {"mean_intersection", agg.mean_intersection},
                               {"mean_only_dataset2", agg.mean_only2},
                               {"prop_tp_dataset1", agg.prop_tp1},
                               {"prop_tp_dataset2", agg.prop_tp2},
                               {"prop_intersection", agg.prop_intersection}});
    }
    return json{{"arm1", scenario_to_json(report.arm1)},
                {"arm2", scenario_to_json(report.arm2)},
                {"shared_truth_seed", report.shared_truth_seed},
                {"n_true_signals", report.arm1.n_true_signals},
                {"methods", methods}};
}

inline std::string replicability_rows_to_csv(const ReplicabilityReport& report) {
    std::ostringstream out;
    out << "replication,method,tp_dataset1,tp_dataset2,intersection,failed,error\n";
    for (const auto& row : report.rows) {
        out << row.replication << ',' << method_name(row.method) << ',';
        if (row.failed) {
            std::string err = row.error;
            std::replace(err.begin(), err.end(), ',', ';');
            out << ",,,1," << err << '\n';
        } else {
            out << row.tp1 << ',' << row.tp2 << ',' << row.intersection
                << ",0,\n";
        }
    }
    return out.str();
}

// ---- bench ------------------------------------------------------------

inline BenchSpec bench_from_json(const json& j) {
    BenchSpec spec;
    if (j.contains("fixed_p")) spec.fixed_p = j.at("fixed_p").get<int>();
    if (j.contains("n_values"))
        spec.n_values = j.at("n_values").get<std::vector<int>>();
    if (j.contains("fixed_n")) spec.fixed_n = j.at("fixed_n").get<int>();
    if (j.contains("p_values"))
        spec.p_values = j.at("p_values").get<std::vector<int>>();
    spec.replications = j.value("replications", 20);
    spec.sigma2 = j.value("sigma2", 0.5);
    spec.effect_size = j.value("effect_size", 0.3);
    spec.alpha = j.value("alpha", 0.05);
    spec.seed = j.value("seed", static_cast<std::uint64_t>(20250810));
    if (j.contains("methods"))
        spec.methods = parse_methods(j.at("methods").get<std::vector<std::string>>());
    spec.validate();
    return spec;
}

inline json bench_report_to_json(const BenchReport& report) {
    json cells = json::array();
    for (const auto& cell : report.cells) {
        json methods = json::object();
        for (std::size_t mi = 0; mi < report.spec.methods.size(); ++mi)
            methods[method_name(report.spec.methods[mi])] =
                cell.mean_seconds[mi];
        cells.push_back(json{{"grid", cell.grid},
                             {"p", cell.p},
                             {"n", cell.n},
                             {"mean_seconds", methods},
                             {"wall_seconds", cell.wall_seconds}});
    }
    json slopes = json::object();
    for (MethodTag m : report.spec.methods)
        slopes[method_name(m)] = report.loglog_slope_p(m);
    return json{{"replications", report.spec.replications},
                {"cells", cells},
                {"loglog_slope_p", slopes}};
}

inline std::string bench_report_to_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "grid,p,n,method,mean_seconds\n";
    for (const auto& cell : report.cells)
        for (std::size_t mi = 0; mi < report.spec.methods.size(); ++mi)
            out << cell.grid << ',' << cell.p << ',' << cell.n << ','
                << method_name(report.spec.methods[mi]) << ','
                << format_double(cell.mean_seconds[mi]) << '\n';
    return out.str();
}

}  // namespace coreg
