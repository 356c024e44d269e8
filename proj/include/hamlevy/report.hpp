#ifndef HAMLEVY_REPORT_HPP
#define HAMLEVY_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace hamlevy {

enum class Status { Pass, Fail, Inconclusive };

inline const char* status_name(Status s) {
    switch (s) {
        case Status::Pass: return "PASS";
        case Status::Fail: return "FAIL";
        default: return "INCONCLUSIVE";
    }
}

inline Status combine_status(Status a, Status b) {
    if (a == Status::Fail || b == Status::Fail) return Status::Fail;
    if (a == Status::Inconclusive || b == Status::Inconclusive)
        return Status::Inconclusive;
    return Status::Pass;
}

struct ReportRow {
    std::string statistic;
    double value = std::nan("");
    double stderr_value = std::nan("");
    double R = std::nan("");
    double t = std::nan("");
    double s = std::nan("");
    std::string status;  // optional per-row verdict
};

struct ExperimentReport {
    std::string experiment;
    std::string kernel;
    std::string nu;
    double p = std::nan("");
    Status status = Status::Inconclusive;
    std::vector<ReportRow> rows;
    std::map<std::string, std::string> config;  // echoed verbatim
    std::vector<std::string> notes;

    void add(std::string statistic, double value,
             double stderr_value = std::nan(""), double R = std::nan(""),
             double t = std::nan(""), double s = std::nan(""),
             std::string status_str = "") {
        rows.push_back(ReportRow{std::move(statistic), value, stderr_value, R, t, s,
                                 std::move(status_str)});
    }

    static std::string fmt(double v) {
        if (std::isnan(v)) return "";
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    // schema: experiment,kernel,nu,p,R,t,s,statistic,value,stderr,status
    std::string csv_body() const {
        std::string out = "experiment,kernel,nu,p,R,t,s,statistic,value,stderr,status\n";
        for (const auto& r : rows) {
            out += experiment + "," + kernel + "," + nu + "," + fmt(p) + "," +
                   fmt(r.R) + "," + fmt(r.t) + "," + fmt(r.s) + "," + r.statistic +
                   "," + fmt(r.value) + "," + fmt(r.stderr_value) + "," +
                   (r.status.empty() ? status_name(status) : r.status) + "\n";
        }
        return out;
    }

    std::string csv(const std::string& timestamp) const {
        std::string out;
        if (!timestamp.empty()) out += "# generated_at=" + timestamp + "\n";
        return out + csv_body();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["experiment"] = experiment;
        j["kernel"] = kernel;
        j["nu"] = nu;
        if (!std::isnan(p)) j["p"] = p;
        j["status"] = status_name(status);
        j["config"] = config;
        j["notes"] = notes;
        auto& rows_j = j["rows"] = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json rj;
            rj["statistic"] = r.statistic;
            if (!std::isnan(r.value)) rj["value"] = r.value;
            if (!std::isnan(r.stderr_value)) rj["stderr"] = r.stderr_value;
            if (!std::isnan(r.R)) rj["R"] = r.R;
            if (!std::isnan(r.t)) rj["t"] = r.t;
            if (!std::isnan(r.s)) rj["s"] = r.s;
            if (!r.status.empty()) rj["status"] = r.status;
            rows_j.push_back(rj);
        }
        return j;
    }
};

}  // namespace hamlevy

#endif
