#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace srb {

/// Raised for malformed input files and schema violations. The CLI maps it
/// to exit code 1.
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Sex { Male, Female };

/// One sampled birth from a survey or census microdata file.
struct BirthRecord {
    std::string region_id;
    int year = 0;
    std::string cluster_id;
    std::string stratum_id;
    double weight = 1.0;
    Sex sex = Sex::Male;
    std::string source_id;
    int survey_year = 0;
};

/// An observed sex ratio (male/female births) for a region-period together
/// with its sampling error on the log scale.
struct SrbObservation {
    std::string region_id;
    int period_start = 0;
    int period_end = 0;      // inclusive
    double ratio = 0.0;      // male births / female births
    double log_se = 0.0;     // standard error of log(ratio)
    long n_births = 0;       // unweighted
    std::string source_id;
    double reference_year = 0.0;  // period midpoint

    void validate() const {
        if (period_start > period_end)
            throw InputError("observation period_start > period_end");
        if (!(ratio > 0.0))
            throw InputError("observation ratio must be positive");
        if (!(log_se > 0.0))
            throw InputError("observation log_se must be positive");
    }
};

/// Total fertility rate by calendar year for one region, contiguous over
/// its declared range.
struct TfrSeries {
    std::string region_id;
    std::map<int, double> values;  // year -> children per woman

    int first_year() const { return values.begin()->first; }
    int last_year() const { return values.rbegin()->first; }

    double at(int year) const {
        auto it = values.find(year);
        if (it == values.end())
            throw InputError("TFR for region " + region_id + " has no year " +
                             std::to_string(year));
        return it->second;
    }
};

}  // namespace srb
