#include "ergorisk/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergorisk/csv.hpp"
#include "ergorisk/error.hpp"
#include "ergorisk/parallel.hpp"

namespace ergorisk {

std::array<std::size_t, 3> Dataset::label_counts() const {
    std::array<std::size_t, 3> counts{};
    for (const auto& e : examples) ++counts[index_of(e.label)];
    return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.window_seconds = window_seconds;
    out.provenance = provenance;
    out.examples.reserve(indices.size());
    for (auto i : indices) out.examples.push_back(examples.at(i));
    return out;
}

void validate(const Dataset& d) {
    if (d.empty()) throw Error(ErrorKind::EmptyDataset, "dataset is empty");
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& f = d.examples[i].features;
        for (double x : f.as_array())
            if (!std::isfinite(x))
                throw Error(ErrorKind::MalformedInput,
                            "dataset example " + std::to_string(i) + " has a non-finite feature");
        if (!(f.fft_min <= f.fft_median && f.fft_median <= f.fft_max && f.fft_std >= 0.0))
            throw Error(ErrorKind::MalformedInput,
                        "dataset example " + std::to_string(i) + " has inconsistent spectral statistics");
        auto l = index_of(d.examples[i].label);
        if (l < 0 || l > 2)
            throw Error(ErrorKind::MalformedInput, "dataset example has an unknown label");
    }
}

FeatureVector extract_window_features(const Window& w, double sample_rate, double weight,
                                      double h) {
    auto spectrum = fft_magnitude(w, sample_rate);
    if (spectrum.magnitudes.size() < 2)
        throw Error(ErrorKind::InvalidParameter,
                    "window of " + std::to_string(w.length()) + " sample(s) has no non-DC bins");

    std::vector<double> mags(spectrum.magnitudes.begin() + 1, spectrum.magnitudes.end());
    const double n = static_cast<double>(mags.size());
    const double mean = std::accumulate(mags.begin(), mags.end(), 0.0) / n;
    double ss = 0.0;
    for (double m : mags) ss += (m - mean) * (m - mean);

    FeatureVector f;
    f.weight = weight;
    f.h = h;
    f.fft_mean = mean;
    f.fft_std = std::sqrt(ss / n);

    std::sort(mags.begin(), mags.end());
    f.fft_min = mags.front();
    f.fft_max = mags.back();
    auto mid = mags.size() / 2;
    f.fft_median = mags.size() % 2 == 1 ? mags[mid] : 0.5 * (mags[mid - 1] + mags[mid]);
    return f;
}

Dataset build_dataset(std::span<const EmgRecording> recordings, double window_seconds,
                      const RiskThresholds& thresholds, UnitSystem unit, std::string provenance,
                      unsigned threads) {
    validate(thresholds);
    std::vector<std::vector<LabeledExample>> per_session(recordings.size());

    parallel_for(recordings.size(), threads, [&](std::size_t s) {
        const auto& rec = recordings[s];
        if (!rec.meta.task)
            throw Error(ErrorKind::MalformedInput,
                        "recording '" + rec.meta.session_id + "' has no lifting task");
        validate(rec);
        const auto& task = *rec.meta.task;
        const auto label = assess_session(task, unit, thresholds).label;
        auto windows = segment(rectify(rec), window_seconds);
        auto& out = per_session[s];
        out.reserve(windows.size());
        for (std::size_t i = 0; i < windows.size(); ++i) {
            out.push_back({extract_window_features(windows[i], rec.sample_rate, task.weight, task.h),
                           label, rec.meta.session_id, i});
        }
    });

    Dataset d;
    d.window_seconds = window_seconds;
    d.provenance = std::move(provenance);
    for (auto& s : per_session)
        for (auto& e : s) d.examples.push_back(std::move(e));
    if (d.empty())
        throw Error(ErrorKind::EmptyDataset, "no recording is long enough for one window");
    return d;
}

std::string dataset_to_csv(const Dataset& d) {
    std::string out;
    for (auto name : kFeatureNames) {
        out += name;
        out += ',';
    }
    out += "label,session_id,window_index\n";
    for (const auto& e : d.examples) {
        for (double x : e.features.as_array()) {
            out += csv::format(x);
            out += ',';
        }
        out += to_string(e.label);
        out += ',';
        out += e.session_id;
        out += ',';
        out += std::to_string(e.window_index);
        out += '\n';
    }
    return out;
}

void write_dataset(const std::filesystem::path& path, const Dataset& d) {
    csv::write_atomic(path, dataset_to_csv(d));
}

namespace {

Dataset dataset_from_table(const csv::Table& t, const std::string& source_name) {
    std::array<std::size_t, kFeatureDim> cols{};
    for (std::size_t k = 0; k < kFeatureDim; ++k) cols[k] = t.column(kFeatureNames[k]);
    auto lcol = t.column("label");
    auto scol = t.column("session_id");
    auto wcol = t.column("window_index");

    Dataset d;
    d.provenance = source_name;
    d.examples.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        FeatureArray a{};
        for (std::size_t k = 0; k < kFeatureDim; ++k) a[k] = csv::to_double(r[cols[k]], kFeatureNames[k]);
        d.examples.push_back({FeatureVector::from_array(a), parse_risk_label(r[lcol]), r[scol],
                              static_cast<std::size_t>(csv::to_int(r[wcol], "window_index"))});
    }
    validate(d);
    return d;
}

}  // namespace

Dataset parse_dataset(std::string_view csv_text, const std::string& source_name) {
    return dataset_from_table(csv::parse(csv_text, source_name), source_name);
}

Dataset read_dataset(const std::filesystem::path& path) {
    return dataset_from_table(csv::read(path), path.string());
}

}  // namespace ergorisk
