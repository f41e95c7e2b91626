#ifndef OARVC_REPORT_HPP
#define OARVC_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace oarvc {

// One sweep-point record. Every record carries the seed that produced it so a
// report is reproducible from its own rows.
struct ReportRecord {
    double snr_db = 0.0;
    double cbr = 0.0;
    double kbps = 0.0;
    double fer = 0.0;
    double ber = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double box_iou = 0.0;
    double category_accuracy = 0.0;
    double angle_mae_deg = 0.0;
    std::uint64_t seed = 0;
};

struct Report {
    std::string experiment_id;
    nlohmann::json config;  // config snapshot
    std::vector<ReportRecord> records;

    void sort_records() {
        std::stable_sort(records.begin(), records.end(),
                         [](const ReportRecord& a, const ReportRecord& b) {
                             return a.snr_db < b.snr_db;
                         });
    }
};

namespace detail {

// Fixed formatting so identical runs produce byte-identical CSV bodies. PSNR
// of identical images prints as "inf" rather than poisoning plots with NaN.
inline std::string format_metric(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace detail

inline void write_report_csv(std::ostream& out, const Report& report) {
    out << "experiment,snr_db,cbr,kbps,fer,ber,psnr_db,ssim,box_iou,category_accuracy,"
           "angle_mae_deg,seed\n";
    for (const ReportRecord& r : report.records) {
        out << report.experiment_id << ',' << detail::format_metric(r.snr_db) << ','
            << detail::format_metric(r.cbr) << ',' << detail::format_metric(r.kbps) << ','
            << detail::format_metric(r.fer) << ',' << detail::format_metric(r.ber) << ','
            << detail::format_metric(r.psnr_db) << ',' << detail::format_metric(r.ssim) << ','
            << detail::format_metric(r.box_iou) << ','
            << detail::format_metric(r.category_accuracy) << ','
            << detail::format_metric(r.angle_mae_deg) << ',' << r.seed << '\n';
    }
}

inline void write_report_json(std::ostream& out, const Report& report) {
    nlohmann::json j;
    j["experiment"] = report.experiment_id;
    j["config"] = report.config;
    auto records = nlohmann::json::array();
    for (const ReportRecord& r : report.records) {
        nlohmann::json rec;
        rec["snr_db"] = r.snr_db;
        rec["cbr"] = r.cbr;
        rec["kbps"] = r.kbps;
        rec["fer"] = r.fer;
        rec["ber"] = r.ber;
        rec["psnr_db"] = std::isinf(r.psnr_db) ? nlohmann::json("inf")
                                               : nlohmann::json(r.psnr_db);
        rec["ssim"] = r.ssim;
        rec["box_iou"] = r.box_iou;
        rec["category_accuracy"] = r.category_accuracy;
        rec["angle_mae_deg"] = r.angle_mae_deg;
        rec["seed"] = r.seed;
        records.push_back(std::move(rec));
    }
    j["records"] = std::move(records);
    out << j.dump(2) << "\n";
}

}  // namespace oarvc

#endif  // OARVC_REPORT_HPP
