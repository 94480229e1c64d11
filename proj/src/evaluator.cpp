#include "difbench/evaluator.hpp"

#include <cmath>
#include <set>

#include "difbench/text.hpp"

using nlohmann::json;

namespace difbench {

nlohmann::json to_json(const InstanceScore& s) {
    json detail = json::object();
    for (const auto& [doc_id, d] : s.per_doc_detail)
        detail[std::to_string(doc_id)] =
            json{{"matched", d.matched}, {"spurious", d.spurious}, {"missed", d.missed}};
    return json{{"schema_version", kSchemaVersion},
                {"tp", s.tp},
                {"fp", s.fp},
                {"fn", s.fn},
                {"precision", s.precision},
                {"recall", s.recall},
                {"f1", s.f1},
                {"per_doc_detail", detail}};
}

InstanceScore score_instance(const PredictionSet& predictions, const GroundTruth& truth, int n) {
    InstanceScore score;
    for (int doc_id = 1; doc_id <= n; ++doc_id) {
        std::map<std::string, std::string> gold;  // normalized -> original
        if (auto it = truth.per_doc_gold.find(doc_id); it != truth.per_doc_gold.end())
            for (const auto& f : it->second) gold.emplace(normalize_feature(f.text), f.text);

        DocDetail detail;
        std::set<std::string> predicted_norm;
        if (auto it = predictions.per_doc.find(doc_id); it != predictions.per_doc.end()) {
            for (const auto& text : it->second) {
                auto norm = normalize_feature(text);
                if (!predicted_norm.insert(norm).second) continue;  // duplicates count once
                if (gold.count(norm))
                    detail.matched.push_back(text);
                else
                    detail.spurious.push_back(text);
            }
        }
        for (const auto& [norm, original] : gold)
            if (!predicted_norm.count(norm)) detail.missed.push_back(original);

        score.tp += static_cast<std::int64_t>(detail.matched.size());
        score.fp += static_cast<std::int64_t>(detail.spurious.size());
        score.fn += static_cast<std::int64_t>(detail.missed.size());
        score.per_doc_detail.emplace(doc_id, std::move(detail));
    }

    const auto tp = static_cast<double>(score.tp);
    score.precision = (score.tp + score.fp > 0) ? tp / static_cast<double>(score.tp + score.fp) : 0.0;
    score.recall = (score.tp + score.fn > 0) ? tp / static_cast<double>(score.tp + score.fn) : 0.0;
    score.f1 = (score.precision + score.recall > 0.0)
                   ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                   : 0.0;
    return score;
}

static json cell_key_json(const CellKey& key) {
    return json{{"n", key.n}, {"theta", key.theta}, {"model", key.model}};
}

nlohmann::json to_json(const AggregateReport& r) {
    json cells = json::array();
    for (const auto& [key, stats] : r.per_cell) {
        json c = cell_key_json(key);
        c["count"] = stats.count;
        c["mean_f1"] = stats.mean_f1;
        c["std_f1"] = stats.std_f1;
        c["mean_precision"] = stats.mean_precision;
        c["mean_recall"] = stats.mean_recall;
        cells.push_back(c);
    }
    return json{{"schema_version", kSchemaVersion},
                {"per_cell", cells},
                {"mean_f1", r.mean_f1},
                {"std_f1", r.std_f1},
                {"mean_precision", r.mean_precision},
                {"mean_recall", r.mean_recall},
                {"sample_count", r.sample_count}};
}

AggregateReport aggregate(const std::vector<std::pair<CellKey, InstanceScore>>& scores) {
    std::map<CellKey, std::vector<const InstanceScore*>> cells;
    for (const auto& [key, score] : scores) cells[key].push_back(&score);

    AggregateReport report;
    for (const auto& [key, list] : cells) {
        if (list.empty()) throw EmptyCell("no scores for cell model=" + key.model);
        CellStats stats;
        stats.count = static_cast<int>(list.size());
        double sum_f1 = 0, sum_p = 0, sum_r = 0;
        for (const auto* s : list) {
            sum_f1 += s->f1;
            sum_p += s->precision;
            sum_r += s->recall;
        }
        stats.mean_f1 = sum_f1 / stats.count;
        stats.mean_precision = sum_p / stats.count;
        stats.mean_recall = sum_r / stats.count;
        double var = 0;
        for (const auto* s : list) var += (s->f1 - stats.mean_f1) * (s->f1 - stats.mean_f1);
        stats.std_f1 = std::sqrt(var / stats.count);  // population std across samples
        report.per_cell.emplace(key, stats);
        report.sample_count += stats.count;
    }
    if (!report.per_cell.empty()) {
        double sum_f1 = 0, sum_std = 0, sum_p = 0, sum_r = 0;
        for (const auto& [key, stats] : report.per_cell) {
            sum_f1 += stats.mean_f1;
            sum_std += stats.std_f1;
            sum_p += stats.mean_precision;
            sum_r += stats.mean_recall;
        }
        const auto c = static_cast<double>(report.per_cell.size());
        report.mean_f1 = sum_f1 / c;
        report.std_f1 = sum_std / c;
        report.mean_precision = sum_p / c;
        report.mean_recall = sum_r / c;
    }
    return report;
}

nlohmann::json to_json(const TokenReport& r) {
    json cells = json::array();
    for (const auto& [key, stats] : r.per_cell) {
        json c = cell_key_json(key);
        c["exact_count"] = stats.exact_count;
        c["estimated_count"] = stats.estimated_count;
        if (stats.mean_output_exact) c["mean_output_exact"] = *stats.mean_output_exact;
        if (stats.mean_output_estimated) c["mean_output_estimated"] = *stats.mean_output_estimated;
        cells.push_back(c);
    }
    return json{{"schema_version", kSchemaVersion}, {"per_cell", cells}};
}

TokenReport token_stats(const std::vector<std::pair<CellKey, TokenUsage>>& usages) {
    struct Acc {
        std::int64_t exact_sum = 0;
        int exact_n = 0;
        std::int64_t est_sum = 0;
        int est_n = 0;
    };
    std::map<CellKey, Acc> accs;
    for (const auto& [key, usage] : usages) {
        auto& a = accs[key];
        if (usage.estimated) {
            a.est_sum += usage.output_tokens;
            ++a.est_n;
        } else {
            a.exact_sum += usage.output_tokens;
            ++a.exact_n;
        }
    }
    TokenReport report;
    for (const auto& [key, a] : accs) {
        TokenCellStats stats;
        stats.exact_count = a.exact_n;
        stats.estimated_count = a.est_n;
        if (a.exact_n > 0)
            stats.mean_output_exact = static_cast<double>(a.exact_sum) / a.exact_n;
        if (a.est_n > 0)
            stats.mean_output_estimated = static_cast<double>(a.est_sum) / a.est_n;
        report.per_cell.emplace(key, stats);
    }
    return report;
}

}  // namespace difbench
