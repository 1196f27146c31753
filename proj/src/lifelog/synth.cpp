#include "lifebench/lifelog/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lifebench/core/rng.hpp"
#include "lifebench/lifelog/registry.hpp"

namespace lifebench {

namespace {

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

double round1(double v) { return std::round(v * 10.0) / 10.0; }

// Daily value around a per-user baseline, with occasional anomalies.
double draw_daily(Rng& rng, double baseline, const DomainParams& p, double lo, double hi) {
    double v = rng.normal(baseline, p.spread);
    if (rng.bernoulli(p.anomaly_rate)) v += (rng.bernoulli(0.5) ? 2.5 : -2.5) * p.spread;
    return clamp(v, lo, hi);
}

struct UserProfile {
    double sleep_base, deep_frac, steps_base, sedentary_base, calories_base;
    double emotion_base, stress_base;
    std::vector<double> diet_pref;  // sampling weights per diet category
};

UserProfile draw_profile(Rng& rng, const SynthSpec& s) {
    UserProfile p;
    auto base = [&](const DomainParams& d) {
        return clamp(rng.normal(d.mean, d.user_spread), d.mean - 3 * d.user_spread,
                     d.mean + 3 * d.user_spread);
    };
    p.sleep_base = base(s.sleep);
    p.deep_frac = rng.uniform(0.15, 0.30);
    p.steps_base = clamp(rng.normal(8000.0, 2000.0), 2000.0, 16000.0);
    p.sedentary_base = clamp(rng.normal(540.0, 80.0), 240.0, 840.0);
    p.calories_base = base(s.diet);
    p.emotion_base = clamp(base(s.emotion), 2.0, 9.0);
    p.stress_base = clamp(rng.normal(11.0 - p.emotion_base, 0.8), 2.0, 9.0);
    for (size_t i = 0; i < diet_categories().size(); ++i) p.diet_pref.push_back(rng.uniform(0.2, 1.0));
    return p;
}

size_t pick_weighted(Rng& rng, const std::vector<double>& w) {
    double total = 0;
    for (double x : w) total += x;
    double r = rng.uniform() * total;
    for (size_t i = 0; i < w.size(); ++i) {
        r -= w[i];
        if (r < 0) return i;
    }
    return w.size() - 1;
}

}  // namespace

AlignedDataset synthesize_dataset(const SynthSpec& spec) {
    spec.validate();
    AlignedDataset ds;
    const Date end = spec.start_date + (spec.n_days - 1);

    for (int ui = 0; ui < spec.n_users; ++ui) {
        char idbuf[16];
        std::snprintf(idbuf, sizeof idbuf, "u%03d", ui + 1);
        const UserId user = idbuf;
        ds.users.insert(user);

        Rng rng(fnv1a(user, spec.seed ^ 0x9e3779b97f4a7c15ULL));
        const UserProfile prof = draw_profile(rng, spec);

        // Missing days are capped at 10% per (user, domain) so the presence
        // guarantee holds for every user, not just in expectation.
        const int missing_cap = spec.n_days / 10;
        std::vector<std::vector<bool>> missing(4, std::vector<bool>(spec.n_days, false));
        for (auto& mask : missing) {
            int count = 0;
            for (int di = 0; di < spec.n_days && count < missing_cap; ++di)
                if (rng.bernoulli(spec.missing_rate)) {
                    mask[di] = true;
                    ++count;
                }
        }

        for (int di = 0; di < spec.n_days; ++di) {
            const Date day = spec.start_date + di;
            const std::int64_t day_ts = static_cast<std::int64_t>(day.days) * 86400;

            auto add_daily = [&](DomainTag dom, const char* metric, MetricValue v,
                                 const char* unit) {
                ds.daily.push_back({user, dom, day, metric, std::move(v), unit});
            };

            // Sleep
            if (!missing[0][di]) {
                double total =
                    std::round(draw_daily(rng, prof.sleep_base, spec.sleep, 180.0, 720.0));
                double deep = std::round(total * clamp(rng.normal(prof.deep_frac, 0.03), 0.10, 0.40));
                add_daily(DomainTag::Sleep, "sleep.total_minutes", total, "minutes");
                add_daily(DomainTag::Sleep, "sleep.deep_minutes", deep, "minutes");
            }

            // Activity: sessions first; the daily total is their exact sum.
            if (!missing[1][di]) {
                int n_sessions = static_cast<int>(rng.uniform_int(1, 3));
                double total = 0;
                for (int si = 0; si < n_sessions; ++si) {
                    double minutes = static_cast<double>(rng.uniform_int(10, 60));
                    std::int64_t start = day_ts + rng.uniform_int(7, 20) * 3600 +
                                         rng.uniform_int(0, 59) * 60;
                    ds.events.push_back({user, DomainTag::Activity, start,
                                         start + static_cast<std::int64_t>(minutes) * 60,
                                         "activity.session_minutes", minutes, "minutes"});
                    total += minutes;
                }
                double aerobic_target =
                    draw_daily(rng, spec.activity.mean + (prof.steps_base - 8000.0) / 200.0,
                               spec.activity, 0.0, total);
                double aerobic = std::round(clamp(aerobic_target, 0.0, total));
                double steps = std::round(clamp(rng.normal(prof.steps_base + total * 40.0, 900.0),
                                                0.0, 40000.0));
                double sedentary =
                    std::round(clamp(rng.normal(prof.sedentary_base - total, 60.0), 60.0, 960.0));
                add_daily(DomainTag::Activity, "activity.total_minutes", total, "minutes");
                add_daily(DomainTag::Activity, "activity.aerobic_minutes", aerobic, "minutes");
                add_daily(DomainTag::Activity, "activity.steps", steps, "count");
                add_daily(DomainTag::Activity, "activity.sedentary_minutes", sedentary, "minutes");
            }

            // Diet: daily calories plus meal events.
            if (!missing[2][di]) {
                double calories =
                    std::round(draw_daily(rng, prof.calories_base, spec.diet, 900.0, 4500.0));
                add_daily(DomainTag::Diet, "diet.calories", calories, "kcal");
                static const int kMealHours[4] = {8, 12, 16, 19};
                int n_meals = static_cast<int>(rng.uniform_int(2, 4));
                for (int mi = 0; mi < n_meals; ++mi) {
                    std::int64_t start =
                        day_ts + kMealHours[mi] * 3600 + rng.uniform_int(0, 45) * 60;
                    const std::string& cat =
                        diet_categories()[pick_weighted(rng, prof.diet_pref)];
                    ds.events.push_back({user, DomainTag::Diet, start, std::nullopt,
                                         "diet.category", cat, "category"});
                }
            }

            // Emotion
            if (!missing[3][di]) {
                double score =
                    round1(draw_daily(rng, prof.emotion_base, spec.emotion, 1.0, 10.0));
                double stress =
                    round1(draw_daily(rng, prof.stress_base, spec.emotion, 1.0, 10.0));
                add_daily(DomainTag::Emotion, "emotion.score", score, "score");
                add_daily(DomainTag::Emotion, "emotion.stress_score", stress, "score");
            }
        }
    }

    ds.finalize();
    // Users with fully missing data still count; the span is the configured one.
    ds.date_span = {spec.start_date, end};
    ds.reference_date = end;
    return ds;
}

}  // namespace lifebench
