#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "caprisk/baselines.hpp"
#include "caprisk/core.hpp"
#include "caprisk/decision.hpp"
#include "caprisk/evaluation.hpp"
#include "caprisk/rng.hpp"
#include "caprisk/stochastic.hpp"
#include "caprisk/synth.hpp"

using json = nlohmann::json;
using namespace caprisk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitEmptyResult = 3;
constexpr int kExitInternalError = 4;

struct RunConfig {
    std::string input;
    std::string output;
    std::string format = "json";
    std::vector<double> horizons = {30.0, 60.0, 90.0};
    double delta = 0.02;
    int window = 30;
    double threshold = 0.60;
    double cost_call = 1.0;
    double cost_case = 10.0;
    std::uint64_t seed = 0;
    int iterations = 1;
    int sample_size = 0;
    int workers = 0;
    bool apply_cohort_filter = false;
    // simulate
    int systems = 100;
    int days = 120;
    std::string kind = "mixed";
    double mu = 0.0;
    double sigma2 = 1e-4;
    double slope = 0.001;
    double start = 0.45;

    int effective_workers() const {
        if (workers > 0) return workers;
        const unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : static_cast<int>(hc);
    }
};

void write_output(const RunConfig& cfg, const std::string& payload) {
    if (cfg.output.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) {
        throw Error("cannot open output file: " + cfg.output);
    }
    out << payload;
}

std::string csv_field(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

json json_or_null(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

// Results land in index-addressed slots, so output order is canonical no
// matter how many workers run.
void run_per_system(std::size_t count, int workers,
                    const std::function<void(std::size_t)>& body) {
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (n == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < count;
                 i += static_cast<std::size_t>(n)) {
                body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

json matrix_json(const ConfusionMatrix& m) {
    json j;
    j["tn"] = m.tn;
    j["fp"] = m.fp;
    j["fn"] = m.fn;
    j["tp"] = m.tp;
    j["total"] = m.total();
    j["accuracy"] = m.total() > 0 ? json(m.accuracy()) : json(nullptr);
    j["precision"] = m.tp + m.fp > 0 ? json(m.precision()) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// risk
// ---------------------------------------------------------------------------

struct RiskRow {
    std::string system_id;
    std::string status; // ok | degenerate | gated | insufficient_data
    std::optional<double> headroom_y;
    std::optional<double> mu;
    std::optional<double> sigma2;
    std::optional<int> n_increments;
    std::optional<NormalityReport> normality;
    std::vector<double> probabilities; // parallel to horizons when scored
};

RiskRow score_risk(const CapacitySeries& series, const std::vector<double>& horizons) {
    RiskRow row;
    row.system_id = series.system_id;
    try {
        row.headroom_y = headroom(series).y;
        const std::vector<double> d = increments(series);
        if (d.size() < 2) {
            row.status = "insufficient_data";
            return row;
        }
        const IncrementStats stats{estimate_drift(d), estimate_variance(d),
                                   static_cast<int>(d.size())};
        row.mu = stats.mu;
        row.sigma2 = stats.sigma2;
        row.n_increments = stats.n;
        if (d.size() < 8) {
            row.status = "insufficient_data";
            return row;
        }
        row.normality = normality_check(d);
        if (!row.normality->passed) {
            row.status = "gated";
            return row;
        }
        const Headroom y{*row.headroom_y};
        for (double h : horizons) {
            row.probabilities.push_back(hitting_probability(y, Horizon{h}, stats).probability);
        }
        row.status = stats.sigma2 == 0.0 ? "degenerate" : "ok";
    } catch (const InsufficientDataError&) {
        row.status = "insufficient_data";
    }
    return row;
}

int cmd_risk(const RunConfig& cfg) {
    const std::vector<CapacitySeries> fleet = ingest_csv(cfg.input);
    std::vector<RiskRow> rows(fleet.size());
    run_per_system(fleet.size(), cfg.effective_workers(),
                   [&](std::size_t i) { rows[i] = score_risk(fleet[i], cfg.horizons); });

    std::string payload;
    if (cfg.format == "json") {
        json doc;
        doc["command"] = "risk";
        doc["horizons"] = cfg.horizons;
        json systems = json::array();
        for (const RiskRow& row : rows) {
            json s;
            s["system_id"] = row.system_id;
            s["status"] = row.status;
            s["headroom"] = json_or_null(row.headroom_y);
            s["mu"] = json_or_null(row.mu);
            s["sigma2"] = json_or_null(row.sigma2);
            s["n_increments"] = row.n_increments ? json(*row.n_increments) : json(nullptr);
            if (row.normality) {
                s["normality"] = {{"statistic", row.normality->statistic},
                                  {"p_value", row.normality->p_value},
                                  {"passed", row.normality->passed}};
            } else {
                s["normality"] = nullptr;
            }
            json risk = json::array();
            for (std::size_t h = 0; h < row.probabilities.size(); ++h) {
                risk.push_back(
                    {{"horizon_days", cfg.horizons[h]}, {"probability", row.probabilities[h]}});
            }
            s["risk"] = risk;
            systems.push_back(s);
        }
        doc["systems"] = systems;
        payload = doc.dump(2) + "\n";
    } else {
        std::ostringstream out;
        out << "system_id,status,headroom,mu,sigma2,n_increments,normality_statistic,"
               "normality_p_value,normality_passed,horizon_days,probability\n";
        for (const RiskRow& row : rows) {
            const std::string prefix =
                row.system_id + ',' + row.status + ',' + csv_field(row.headroom_y) + ',' +
                csv_field(row.mu) + ',' + csv_field(row.sigma2) + ',' +
                (row.n_increments ? std::to_string(*row.n_increments) : std::string()) + ',' +
                (row.normality ? format_double(row.normality->statistic) : std::string()) +
                ',' + (row.normality ? format_double(row.normality->p_value) : std::string()) +
                ',' + (row.normality ? (row.normality->passed ? "true" : "false") : "");
            if (row.probabilities.empty()) {
                out << prefix << ",,\n";
            } else {
                for (std::size_t h = 0; h < row.probabilities.size(); ++h) {
                    out << prefix << ',' << format_double(cfg.horizons[h]) << ','
                        << format_double(row.probabilities[h]) << '\n';
                }
            }
        }
        payload = out.str();
    }
    write_output(cfg, payload);

    const bool any_scored = std::any_of(rows.begin(), rows.end(), [](const RiskRow& r) {
        return r.status == "ok" || r.status == "degenerate";
    });
    return any_scored ? kExitOk : kExitEmptyResult;
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

int cmd_forecast(const RunConfig& cfg) {
    const std::vector<CapacitySeries> fleet = ingest_csv(cfg.input);
    struct Row {
        std::string system_id;
        std::vector<ForecastResult> models;
    };
    std::vector<Row> rows(fleet.size());
    run_per_system(fleet.size(), cfg.effective_workers(), [&](std::size_t i) {
        Row& row = rows[i];
        row.system_id = fleet[i].system_id;
        try {
            row.models.push_back(naive_forecast(fleet[i], cfg.window));
        } catch (const Error&) {
            ForecastResult failed;
            failed.model_id = ModelId::naive;
            failed.reject_reason = RejectReason::insufficient_data;
            row.models.push_back(failed);
        }
        row.models.push_back(plr_fit(fleet[i], cfg.window));
        row.models.push_back(ensemble_forecast(fleet[i], cfg.window));
    });

    bool any_fitted = false;
    std::string payload;
    if (cfg.format == "json") {
        json doc;
        doc["command"] = "forecast";
        doc["horizon_days"] = cfg.window;
        json systems = json::array();
        for (const Row& row : rows) {
            for (const ForecastResult& f : row.models) {
                any_fitted = any_fitted || f.fitted;
                json m;
                m["system_id"] = row.system_id;
                m["model"] = std::string(to_string(f.model_id));
                m["fitted"] = f.fitted;
                m["reject_reason"] = f.reject_reason
                                         ? json(std::string(to_string(*f.reject_reason)))
                                         : json(nullptr);
                if (f.plr) {
                    m["plr"] = {{"start_index", f.plr->start_index},
                                {"slope", f.plr->slope},
                                {"intercept", f.plr->intercept},
                                {"r2", f.plr->r2}};
                }
                if (f.ensemble) {
                    json t = json::array();
                    for (const TournamentEntry& e : f.ensemble->tournament) {
                        t.push_back({{"member", std::string(to_string(e.member))},
                                     {"validation_mape", e.validation_mape}});
                    }
                    m["ensemble"] = {{"tournament", t},
                                     {"first", std::string(to_string(f.ensemble->first))},
                                     {"second", std::string(to_string(f.ensemble->second))},
                                     {"w1", f.ensemble->w1},
                                     {"w2", f.ensemble->w2}};
                }
                json fc = json::array();
                for (const Observation& o : f.forecasts) {
                    fc.push_back({{"day_index", o.day}, {"predicted", o.used}});
                }
                m["forecasts"] = fc;
                systems.push_back(m);
            }
        }
        doc["systems"] = systems;
        payload = doc.dump(2) + "\n";
    } else {
        std::ostringstream out;
        out << "system_id,model,fitted,reject_reason,day_index,predicted\n";
        for (const Row& row : rows) {
            for (const ForecastResult& f : row.models) {
                any_fitted = any_fitted || f.fitted;
                const std::string prefix =
                    row.system_id + ',' + std::string(to_string(f.model_id)) + ',' +
                    (f.fitted ? "true" : "false") + ',' +
                    (f.reject_reason ? std::string(to_string(*f.reject_reason))
                                     : std::string());
                if (f.forecasts.empty()) {
                    out << prefix << ",,\n";
                } else {
                    for (const Observation& o : f.forecasts) {
                        out << prefix << ',' << o.day << ',' << format_double(o.used) << '\n';
                    }
                }
            }
        }
        payload = out.str();
    }
    write_output(cfg, payload);
    return any_fitted ? kExitOk : kExitEmptyResult;
}

// ---------------------------------------------------------------------------
// backtest
// ---------------------------------------------------------------------------

int cmd_backtest(const RunConfig& cfg) {
    const std::vector<CapacitySeries> fleet = ingest_csv(cfg.input);
    std::vector<CapacitySeries> pool;
    for (const CapacitySeries& s : fleet) {
        if (eligible(s)) pool.push_back(s);
    }
    if (pool.empty()) {
        std::cerr << "caprisk backtest: no eligible systems in " << cfg.input << "\n";
        return kExitEmptyResult;
    }

    BacktestOptions options;
    options.iterations = cfg.iterations;
    options.sample_size = cfg.sample_size;
    options.seed = cfg.seed;
    options.workers = cfg.effective_workers();
    const std::vector<BacktestRun> runs = run_backtest(pool, options);

    const std::vector<ModelId> compared = {ModelId::plr, ModelId::ensemble};
    std::string payload;
    if (cfg.format == "json") {
        json doc;
        doc["command"] = "backtest";
        doc["eligible_systems"] = pool.size();
        doc["iterations"] = cfg.iterations;
        doc["seed"] = cfg.seed;
        json out_runs = json::array();
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const BacktestRun& run = runs[i];
            json r;
            r["iteration"] = i;
            r["n_common"] = run.report.n_common;
            json means;
            for (const auto& [model, mean] : run.report.per_model_mean_mape) {
                means[std::string(to_string(model))] = mean;
            }
            r["mean_mape"] = means;
            json welch = json::array();
            for (ModelId model : compared) {
                const WelchResult& w = run.welch_vs_naive.at(model);
                welch.push_back({{"model", std::string(to_string(model))},
                                 {"mean_naive", w.mean_a},
                                 {"mean_model", w.mean_b},
                                 {"t_statistic", w.t_statistic},
                                 {"dof", w.dof},
                                 {"p_value", w.p_value},
                                 {"ci95_low", w.ci95.first},
                                 {"ci95_high", w.ci95.second}});
            }
            r["welch"] = welch;
            out_runs.push_back(r);
        }
        doc["runs"] = out_runs;
        payload = doc.dump(2) + "\n";
    } else {
        std::ostringstream out;
        out << "iteration,model,n_common,mean_naive,mean_model,t_statistic,dof,p_value,"
               "ci95_low,ci95_high\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            for (ModelId model : compared) {
                const WelchResult& w = runs[i].welch_vs_naive.at(model);
                out << i << ',' << to_string(model) << ',' << runs[i].report.n_common << ','
                    << format_double(w.mean_a) << ',' << format_double(w.mean_b) << ','
                    << format_double(w.t_statistic) << ',' << format_double(w.dof) << ','
                    << format_double(w.p_value) << ',' << format_double(w.ci95.first) << ','
                    << format_double(w.ci95.second) << '\n';
            }
        }
        payload = out.str();
    }
    write_output(cfg, payload);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate / optimize
// ---------------------------------------------------------------------------

struct EvaluationRow {
    std::string system_id;
    std::string status; // ok | degenerate | gated | insufficient_data
    std::optional<int> label;
    std::optional<double> ser_probability;
    std::optional<int> ser_prediction;
    bool plr_accepted = false;
    std::optional<RejectReason> plr_reject_reason;
    std::optional<double> plr_days;
    std::optional<int> plr_prediction;
    bool in_common = false;
};

EvaluationRow evaluate_system(const CapacitySeries& series, const RunConfig& cfg) {
    EvaluationRow row;
    row.system_id = series.system_id;

    try {
        row.label = label_actual(series, cfg.window, cfg.delta);
    } catch (const InsufficientDataError&) {
        row.status = "insufficient_data";
        return row;
    }

    // Train on everything before the test window.
    const std::int64_t cutoff_day = series.observations.back().day - cfg.window;
    CapacitySeries train = series;
    train.observations.clear();
    for (const Observation& o : series.observations) {
        if (o.day <= cutoff_day) train.observations.push_back(o);
    }

    const ForecastResult plr = plr_fit(train, 0);
    row.plr_accepted = plr.fitted;
    row.plr_reject_reason = plr.reject_reason;
    if (plr.fitted) {
        const double c_n = train.observations.back().used;
        row.plr_days = days_to_threshold(*plr.plr, c_n, cfg.delta);
        row.plr_prediction = classify_plr(plr, c_n, cfg.delta, cfg.window);
    } else {
        row.plr_prediction = 0;
    }

    try {
        const std::vector<double> d = increments(train);
        if (d.size() < 8) {
            row.status = "insufficient_data";
            return row;
        }
        const NormalityReport normality = normality_check(d);
        if (!normality.passed) {
            row.status = "gated";
            return row;
        }
        const IncrementStats stats{estimate_drift(d), estimate_variance(d),
                                   static_cast<int>(d.size())};
        // The event under test is a delta-sized gain inside the window, so
        // delta plays the role of the level to reach.
        const RiskEstimate risk = hitting_probability(
            Headroom{cfg.delta}, Horizon{static_cast<double>(cfg.window)}, stats);
        row.ser_probability = risk.probability;
        row.ser_prediction = classify_ser(risk.probability, cfg.threshold);
        row.status = stats.sigma2 == 0.0 ? "degenerate" : "ok";
        row.in_common = row.plr_accepted;
    } catch (const InsufficientDataError&) {
        row.status = "insufficient_data";
    }
    return row;
}

std::vector<EvaluationRow> evaluate_fleet(const RunConfig& cfg,
                                          std::vector<CapacitySeries>& fleet_out) {
    fleet_out = ingest_csv(cfg.input);
    if (cfg.apply_cohort_filter) {
        std::vector<CapacitySeries> kept;
        for (CapacitySeries& s : fleet_out) {
            if (in_cohort(s)) kept.push_back(std::move(s));
        }
        fleet_out = std::move(kept);
    }
    std::vector<EvaluationRow> rows(fleet_out.size());
    run_per_system(fleet_out.size(), cfg.effective_workers(),
                   [&](std::size_t i) { rows[i] = evaluate_system(fleet_out[i], cfg); });
    return rows;
}

int cmd_evaluate(const RunConfig& cfg) {
    std::vector<CapacitySeries> fleet;
    const std::vector<EvaluationRow> rows = evaluate_fleet(cfg, fleet);

    std::vector<int> labels_all, preds_all;
    std::vector<int> labels_common, ser_common, plr_common;
    for (const EvaluationRow& row : rows) {
        if (!row.label || !row.ser_prediction) continue;
        labels_all.push_back(*row.label);
        preds_all.push_back(*row.ser_prediction);
        if (row.in_common) {
            labels_common.push_back(*row.label);
            ser_common.push_back(*row.ser_prediction);
            plr_common.push_back(*row.plr_prediction);
        }
    }
    if (labels_all.empty()) {
        std::cerr << "caprisk evaluate: no system could be scored and labeled\n";
        return kExitEmptyResult;
    }

    const ConfusionMatrix table_ser_all = confusion(labels_all, preds_all);
    std::optional<ConfusionMatrix> table_ser_common, table_plr_common;
    if (!labels_common.empty()) {
        table_ser_common = confusion(labels_common, ser_common);
        table_plr_common = confusion(labels_common, plr_common);
    }

    std::string payload;
    if (cfg.format == "json") {
        json doc;
        doc["command"] = "evaluate";
        doc["window_days"] = cfg.window;
        doc["delta"] = cfg.delta;
        doc["threshold"] = cfg.threshold;
        doc["n_scored"] = labels_all.size();
        doc["n_common"] = labels_common.size();
        doc["ser_all"] = matrix_json(table_ser_all);
        doc["ser_common"] = table_ser_common ? matrix_json(*table_ser_common) : json(nullptr);
        doc["plr_common"] = table_plr_common ? matrix_json(*table_plr_common) : json(nullptr);
        json systems = json::array();
        for (const EvaluationRow& row : rows) {
            json s;
            s["system_id"] = row.system_id;
            s["status"] = row.status;
            s["label"] = row.label ? json(*row.label) : json(nullptr);
            s["ser_probability"] = json_or_null(row.ser_probability);
            s["ser_prediction"] = row.ser_prediction ? json(*row.ser_prediction) : json(nullptr);
            s["plr_accepted"] = row.plr_accepted;
            s["plr_reject_reason"] =
                row.plr_reject_reason ? json(std::string(to_string(*row.plr_reject_reason)))
                                      : json(nullptr);
            s["plr_days_to_threshold"] = json_or_null(row.plr_days);
            s["plr_prediction"] = row.plr_prediction ? json(*row.plr_prediction) : json(nullptr);
            s["in_common"] = row.in_common;
            systems.push_back(s);
        }
        doc["systems"] = systems;
        payload = doc.dump(2) + "\n";
    } else {
        std::ostringstream out;
        out << "system_id,status,label,ser_probability,ser_prediction,plr_accepted,"
               "plr_reject_reason,plr_days_to_threshold,plr_prediction,in_common\n";
        for (const EvaluationRow& row : rows) {
            out << row.system_id << ',' << row.status << ','
                << (row.label ? std::to_string(*row.label) : std::string()) << ','
                << csv_field(row.ser_probability) << ','
                << (row.ser_prediction ? std::to_string(*row.ser_prediction) : std::string())
                << ',' << (row.plr_accepted ? "true" : "false") << ','
                << (row.plr_reject_reason ? std::string(to_string(*row.plr_reject_reason))
                                          : std::string())
                << ',' << csv_field(row.plr_days) << ','
                << (row.plr_prediction ? std::to_string(*row.plr_prediction) : std::string())
                << ',' << (row.in_common ? "true" : "false") << '\n';
        }
        payload = out.str();
    }
    write_output(cfg, payload);
    return kExitOk;
}

int cmd_optimize(const RunConfig& cfg) {
    std::vector<CapacitySeries> fleet;
    const std::vector<EvaluationRow> rows = evaluate_fleet(cfg, fleet);

    std::vector<double> probabilities;
    std::vector<int> labels;
    for (const EvaluationRow& row : rows) {
        if (!row.label || !row.ser_probability) continue;
        probabilities.push_back(*row.ser_probability);
        labels.push_back(*row.label);
    }
    if (probabilities.empty()) {
        std::cerr << "caprisk optimize: no system could be scored and labeled\n";
        return kExitEmptyResult;
    }

    const CostModel cost{cfg.cost_call, cfg.cost_case};
    const std::vector<double> grid = default_threshold_grid();
    const ThresholdChoice choice = optimal_threshold(probabilities, labels, cost, grid);

    std::string payload;
    if (cfg.format == "json") {
        json doc;
        doc["command"] = "optimize";
        doc["cost_call"] = cfg.cost_call;
        doc["cost_case"] = cfg.cost_case;
        doc["n_systems"] = probabilities.size();
        doc["optimal"] = {{"threshold", choice.threshold},
                          {"n_calls", choice.outcome.n_calls},
                          {"n_cases", choice.outcome.n_cases},
                          {"total_cost", choice.outcome.total_cost}};
        json curve = json::array();
        for (const CostCurvePoint& point : choice.curve) {
            curve.push_back({{"threshold", point.threshold},
                             {"n_calls", point.outcome.n_calls},
                             {"n_cases", point.outcome.n_cases},
                             {"total_cost", point.outcome.total_cost}});
        }
        doc["curve"] = curve;
        payload = doc.dump(2) + "\n";
    } else {
        std::ostringstream out;
        out << "threshold,n_calls,n_cases,total_cost,is_optimal\n";
        for (const CostCurvePoint& point : choice.curve) {
            out << format_double(point.threshold) << ',' << point.outcome.n_calls << ','
                << point.outcome.n_cases << ',' << format_double(point.outcome.total_cost)
                << ',' << (point.threshold == choice.threshold ? 1 : 0) << '\n';
        }
        payload = out.str();
    }
    write_output(cfg, payload);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
    if (cfg.systems < 1) {
        std::cerr << "caprisk simulate: --systems must be >= 1\n";
        return kExitInputError;
    }
    const std::vector<WorkloadKind> cycle = {WorkloadKind::brownian, WorkloadKind::linear,
                                             WorkloadKind::stratified,
                                             WorkloadKind::discontinuous};
    std::vector<CapacitySeries> fleet(static_cast<std::size_t>(cfg.systems));
    run_per_system(fleet.size(), cfg.effective_workers(), [&](std::size_t i) {
        WorkloadSpec spec;
        spec.kind = cfg.kind == "mixed" ? cycle[i % cycle.size()]
                                        : workload_kind_from_string(cfg.kind);
        std::ostringstream id;
        id << "sys" << std::setw(5) << std::setfill('0') << i;
        spec.system_id = id.str();
        spec.n_days = cfg.days;
        spec.seed = mix64(cfg.seed ^ (static_cast<std::uint64_t>(i) + 1));
        spec.mu = cfg.mu;
        spec.sigma2 = cfg.sigma2;
        spec.slope = cfg.slope;
        spec.start = cfg.start;
        fleet[i] = generate(spec).series;
    });

    std::string payload;
    if (cfg.format == "json") {
        json doc;
        doc["command"] = "simulate";
        doc["seed"] = cfg.seed;
        json systems = json::array();
        for (const CapacitySeries& s : fleet) {
            json obs = json::array();
            for (const Observation& o : s.observations) {
                obs.push_back({{"day_index", o.day}, {"used_fraction", o.used}});
            }
            systems.push_back({{"system_id", s.system_id},
                               {"total_capacity", s.total_capacity},
                               {"observations", obs}});
        }
        doc["systems"] = systems;
        payload = doc.dump(2) + "\n";
    } else {
        std::ostringstream out;
        emit_csv(out, fleet);
        payload = out.str();
    }
    write_output(cfg, payload);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"caprisk: storage capacity risk engine"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string command;

    auto add_common = [&](CLI::App* sub, bool needs_input) {
        if (needs_input) {
            sub->add_option("--input", cfg.input, "input fleet CSV")
                ->envname("CAPRISK_INPUT")
                ->required();
        }
        sub->add_option("--output", cfg.output, "output path (default: stdout)")
            ->envname("CAPRISK_OUTPUT");
        sub->add_option("--format", cfg.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}))
            ->envname("CAPRISK_FORMAT");
        sub->add_option("--workers", cfg.workers, "worker threads (0 = all cores)")
            ->envname("CAPRISK_WORKERS");
        sub->add_option("--seed", cfg.seed, "random seed")->envname("CAPRISK_SEED");
    };

    CLI::App* risk = app.add_subcommand("risk", "score hitting risk per system");
    add_common(risk, true);
    risk->add_option("--horizons", cfg.horizons, "horizons in days")
        ->delimiter(',')
        ->envname("CAPRISK_HORIZONS");
    risk->callback([&] { command = "risk"; });

    CLI::App* forecast = app.add_subcommand("forecast", "run every forecaster per system");
    add_common(forecast, true);
    forecast->add_option("--window", cfg.window, "forecast horizon in days")
        ->envname("CAPRISK_WINDOW");
    forecast->callback([&] { command = "forecast"; });

    CLI::App* backtest =
        app.add_subcommand("backtest", "holdout comparison against the naive model");
    add_common(backtest, true);
    backtest->add_option("--iterations", cfg.iterations, "sampling iterations")
        ->envname("CAPRISK_ITERATIONS");
    backtest->add_option("--sample-size", cfg.sample_size, "systems per iteration (0 = all)")
        ->envname("CAPRISK_SAMPLE_SIZE");
    backtest->callback([&] { command = "backtest"; });

    CLI::App* evaluate = app.add_subcommand("evaluate", "confusion matrices for SER and PLR");
    add_common(evaluate, true);
    evaluate->add_option("--window", cfg.window, "test window in days")
        ->envname("CAPRISK_WINDOW");
    evaluate->add_option("--delta", cfg.delta, "growth defining at-risk")
        ->envname("CAPRISK_DELTA");
    evaluate->add_option("--threshold", cfg.threshold, "probability decision threshold")
        ->envname("CAPRISK_THRESHOLD");
    evaluate->add_flag("--cohort-filter", cfg.apply_cohort_filter,
                       "keep only systems with 60+ days at 50-70% utilization");
    evaluate->callback([&] { command = "evaluate"; });

    CLI::App* optimize = app.add_subcommand("optimize", "cost-minimizing threshold");
    add_common(optimize, true);
    optimize->add_option("--window", cfg.window, "test window in days")
        ->envname("CAPRISK_WINDOW");
    optimize->add_option("--delta", cfg.delta, "growth defining at-risk")
        ->envname("CAPRISK_DELTA");
    optimize->add_option("--cost-call", cfg.cost_call, "cost per proactive call")
        ->envname("CAPRISK_COST_CALL");
    optimize->add_option("--cost-case", cfg.cost_case, "cost per reactive case")
        ->envname("CAPRISK_COST_CASE");
    optimize->add_flag("--cohort-filter", cfg.apply_cohort_filter,
                       "keep only systems with 60+ days at 50-70% utilization");
    optimize->callback([&] { command = "optimize"; });

    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic fleet");
    add_common(simulate, false);
    simulate->add_option("--systems", cfg.systems, "number of systems")
        ->envname("CAPRISK_SYSTEMS");
    simulate->add_option("--days", cfg.days, "days per system")->envname("CAPRISK_DAYS");
    simulate->add_option("--kind", cfg.kind, "workload kind")
        ->check(CLI::IsMember({"mixed", "brownian", "linear", "stratified", "discontinuous"}))
        ->envname("CAPRISK_KIND");
    simulate->add_option("--mu", cfg.mu, "brownian drift per day");
    simulate->add_option("--sigma2", cfg.sigma2, "brownian variance per day");
    simulate->add_option("--slope", cfg.slope, "linear slope per day");
    simulate->add_option("--start", cfg.start, "starting utilization fraction");
    simulate->callback([&] { command = "simulate"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (command == "risk") return cmd_risk(cfg);
        if (command == "forecast") return cmd_forecast(cfg);
        if (command == "backtest") return cmd_backtest(cfg);
        if (command == "evaluate") return cmd_evaluate(cfg);
        if (command == "optimize") return cmd_optimize(cfg);
        if (command == "simulate") return cmd_simulate(cfg);
        std::cerr << "caprisk: unknown command\n";
        return kExitInputError;
    } catch (const ParseError& e) {
        std::cerr << "caprisk: " << e.what() << "\n";
        return kExitInputError;
    } catch (const ValidationError& e) {
        std::cerr << "caprisk: " << e.what() << "\n";
        return kExitInputError;
    } catch (const InsufficientDataError& e) {
        std::cerr << "caprisk: " << e.what() << "\n";
        return kExitEmptyResult;
    } catch (const std::exception& e) {
        std::cerr << "caprisk: internal error: " << e.what() << "\n";
        return kExitInternalError;
    }
}
