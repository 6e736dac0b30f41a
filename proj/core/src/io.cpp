#include "landsel/io.hpp"

#include "landsel/common.hpp"
#include "landsel/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <sstream>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

namespace landsel::io {

namespace {

void write_preamble(std::ostream& os, const std::vector<std::string>& preamble) {
    for (const auto& line : preamble) os << "# " << line << '\n';
}

// Yields (line number, fields) for every data line after the header.
template <typename Fn>
void for_each_row(std::istream& in, const std::string& header, Fn&& fn) {
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::vector<std::string> errors;
    while (std::getline(in, line)) {
        ++line_no;
        line = csv::trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != header) throw ParseError("line " + std::to_string(line_no) + ": unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        try {
            fn(line_no, csv::split(line));
        } catch (const ParseError& e) {
            errors.push_back(e.what());
        }
    }
    if (!header_seen) throw ParseError("missing header '" + header + "'");
    if (!errors.empty()) {
        std::string msg = "malformed rows:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ParseError(msg);
    }
}

int int_field(const std::string& s, int line_no) {
    const auto v = csv::parse_int(s);
    if (!v) throw ParseError("line " + std::to_string(line_no) + ": not an integer: '" + s + "'");
    return *v;
}

double real_field(const std::string& s, int line_no) {
    const auto v = csv::parse_double(s);
    if (!v) throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
    return *v;
}

}  // namespace

std::string features_header() {
    std::string h = "fid,iid,dim,sample_size,reps";
    for (auto name : ela::feature_names()) {
        h += ',';
        h += name;
    }
    return h;
}

void write_features(std::ostream& os, std::vector<ela::FeatureVector> features,
                    const std::vector<std::string>& preamble) {
    std::sort(features.begin(), features.end(), [](const auto& a, const auto& b) {
        return std::tie(a.fid, a.iid, a.sample_size) < std::tie(b.fid, b.iid, b.sample_size);
    });
    write_preamble(os, preamble);
    os << features_header() << '\n';
    for (const auto& fv : features) {
        os << fv.fid << ',' << fv.iid << ',' << fv.dim << ',' << fv.sample_size << ',' << fv.reps;
        for (double v : fv.values) os << ',' << format17(v);
        os << '\n';
    }
    for (const auto& fv : features) {
        std::string flagged;
        for (std::size_t f = 0; f < ela::kFeatureCount; ++f)
            if (fv.imputed[f]) flagged += (flagged.empty() ? "" : ",") + std::string(ela::feature_names()[f]);
        if (!flagged.empty())
            os << "# imputed fid=" << fv.fid << " iid=" << fv.iid << " sample_size=" << fv.sample_size << ": "
               << flagged << '\n';
    }
}

std::vector<ela::FeatureVector> read_features(std::istream& in) {
    // Imputation flags live in trailing comments; collect them first.
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::map<std::tuple<int, int, int>, std::vector<std::string>> imputed;
    {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            int fid = 0, iid = 0, n = 0;
            char names[4096] = {};
            if (std::sscanf(line.c_str(), "# imputed fid=%d iid=%d sample_size=%d: %4095s", &fid, &iid, &n, names) == 4)
                imputed[{fid, iid, n}] = csv::split(names);
        }
    }
    const auto& roster = ela::feature_names();

    std::vector<ela::FeatureVector> out;
    std::istringstream body(text);
    for_each_row(body, features_header(), [&](int line_no, const std::vector<std::string>& f) {
        if (f.size() != 5 + ela::kFeatureCount)
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(5 + ela::kFeatureCount) +
                             " fields, got " + std::to_string(f.size()));
        ela::FeatureVector fv;
        fv.fid = int_field(f[0], line_no);
        fv.iid = int_field(f[1], line_no);
        fv.dim = int_field(f[2], line_no);
        fv.sample_size = int_field(f[3], line_no);
        fv.reps = int_field(f[4], line_no);
        for (std::size_t i = 0; i < ela::kFeatureCount; ++i) fv.values[i] = real_field(f[5 + i], line_no);
        if (const auto it = imputed.find({fv.fid, fv.iid, fv.sample_size}); it != imputed.end())
            for (const auto& name : it->second) {
                const auto pos = std::find(roster.begin(), roster.end(), name);
                if (pos != roster.end()) fv.imputed[static_cast<std::size_t>(pos - roster.begin())] = true;
            }
        out.push_back(fv);
    });
    return out;
}

void write_performance(std::ostream& os, const std::vector<PerformanceRecord>& records,
                       const std::vector<std::string>& preamble) {
    write_preamble(os, preamble);
    os << "algorithm,fid,iid,dim,budget,precision\n";
    for (const auto& r : records)
        os << r.algorithm << ',' << r.fid << ',' << r.iid << ',' << r.dim << ',' << r.budget << ','
           << format17(r.precision) << '\n';
}

void write_predictions(std::ostream& os, const std::vector<pipeline::CvPredictions>& predictions,
                       const std::vector<std::string>& preamble) {
    std::vector<const pipeline::CvPredictions*> order;
    for (const auto& p : predictions) order.push_back(&p);
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        if (a->model_id != b->model_id) return pipeline::model_id_less(a->model_id, b->model_id);
        return std::tie(a->mode, a->algorithm, a->budget, a->sample_size) <
               std::tie(b->mode, b->algorithm, b->budget, b->sample_size);
    });
    write_preamble(os, preamble);
    os << kPredictionsHeader << '\n';
    for (const auto* p : order) {
        for (const auto& [k, v] : p->predicted) {
            const auto t = p->truth.find(k);
            os << p->model_id << ',' << pipeline::to_string(p->mode) << ',' << p->algorithm << ',' << k.fid << ','
               << k.iid << ',' << p->budget << ',' << p->sample_size << ',' << format17(v) << ','
               << (t == p->truth.end() ? std::string("nan") : format17(t->second)) << '\n';
        }
    }
}

std::vector<pipeline::CvPredictions> read_predictions(std::istream& in) {
    using Key = std::tuple<std::string, int, std::string, int, int>;
    std::map<Key, pipeline::CvPredictions> groups;
    std::vector<Key> order;
    for_each_row(in, kPredictionsHeader, [&](int line_no, const std::vector<std::string>& f) {
        if (f.size() != 9)
            throw ParseError("line " + std::to_string(line_no) + ": expected 9 fields, got " + std::to_string(f.size()));
        const auto mode = pipeline::parse_target_mode(f[1]);
        if (!mode) throw ParseError("line " + std::to_string(line_no) + ": unknown target mode '" + f[1] + "'");
        const int budget = int_field(f[5], line_no);
        const int sample_size = int_field(f[6], line_no);
        const Key key{f[0], static_cast<int>(*mode), f[2], budget, sample_size};
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) {
            order.push_back(key);
            it->second.model_id = f[0];
            it->second.mode = *mode;
            it->second.algorithm = f[2];
            it->second.budget = budget;
            it->second.sample_size = sample_size;
        }
        const InstanceKey k{int_field(f[3], line_no), int_field(f[4], line_no)};
        it->second.predicted[k] = real_field(f[7], line_no);
        it->second.truth[k] = real_field(f[8], line_no);
    });
    std::vector<pipeline::CvPredictions> out;
    for (const auto& key : order) out.push_back(std::move(groups.at(key)));
    return out;
}

void write_selectors(std::ostream& os, const selector::SelectorReport& report,
                     const std::vector<std::string>& preamble) {
    write_preamble(os, preamble);
    os << kSelectorHeader << '\n';
    for (const auto& sc : report.scenarios)
        for (const auto& r : sc.rows)
            os << r.model_id << ',' << r.approach << ',' << r.budget << ',' << r.sample_size << ','
               << format17(r.quality.rmse) << ',' << format17(r.quality.log_rmse) << ','
               << (r.pareto ? "true" : "false") << '\n';
}

void write_frequency(std::ostream& os, const selector::Scenario& scenario, const std::vector<std::string>& preamble) {
    write_preamble(os, preamble);
    os << kFrequencyHeader << '\n';
    for (const auto& [approach, freq] : scenario.frequency)
        for (const auto& [algorithm, per_instance] : freq)
            for (const auto& [k, count] : per_instance)
                os << selector::to_string(approach) << ',' << algorithm << ',' << k.fid << ',' << k.iid << ',' << count
                   << '\n';
}

}  // namespace landsel::io
