#pragma once

// Observational data model for discrete-time two-cause event data.
//
// Short format is canonical: each unit is (x, a, t, e) with event time
// t in 1..K (or K+1 when no event occurred by the horizon) and event type
// e in {MainEvent, CompetingEvent, None}. Timesteps are 1-based throughout;
// day-indexed external data (days 0..K-1) is shifted by +1 at ingestion.
//
// Within a timestep the competing event takes precedence: a trajectory with
// both indicators newly set at step k is recorded as a competing event.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "riskshift/matrix.hpp"

namespace riskshift {

enum class EventType : std::uint8_t { MainEvent, CompetingEvent, None };

struct EventRecord {
    std::vector<double> x;
    int a = 0;
    int t = 1;
    EventType e = EventType::None;
};

// Immutable after construction; columnar storage so at-risk extraction is a
// pure index filter and million-row samples stay cheap.
class Dataset {
public:
    Dataset(int horizon, int dim);

    void add(std::span<const double> x, int a, int t, EventType e);
    void reserve(std::size_t n);

    std::size_t size() const { return a_.size(); }
    int horizon() const { return horizon_; }
    int dim() const { return dim_; }

    std::span<const double> x(std::size_t i) const {
        return {x_.data() + i * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }
    int a(std::size_t i) const { return a_[i]; }
    int t(std::size_t i) const { return t_[i]; }
    EventType e(std::size_t i) const { return e_[i]; }

    EventRecord record(std::size_t i) const;

    // Appends another dataset with the same horizon and dim.
    void append(const Dataset& other);

private:
    int horizon_;
    int dim_;
    std::vector<double> x_;
    std::vector<std::int8_t> a_;
    std::vector<std::int32_t> t_;
    std::vector<EventType> e_;
};

// Long-format trajectory: cumulative 0/1 indicators of length K for the main
// (y) and competing (d) event. Once set, an indicator stays set; the two are
// mutually exclusive.
struct LongTrajectory {
    std::vector<double> x;
    int a = 0;
    std::vector<std::uint8_t> y;
    std::vector<std::uint8_t> d;
};

// Short-format conversion. Throws DataError on non-monotone or overlapping
// indicator sequences. Both indicators newly set at the same step resolve to
// a competing event.
Dataset from_long(const std::vector<LongTrajectory>& trajectories, int horizon);
std::vector<LongTrajectory> to_long(const Dataset& ds);

// Units eligible for the step-k hazard classifiers in arm a, with their
// binary labels. Empty sets are legal.
struct AtRiskSample {
    std::vector<std::uint32_t> indices;
    std::vector<std::uint8_t> labels;
    int k = 1;
    int a = 0;
    EventType event = EventType::MainEvent;
};

// Competing at-risk set at step k: no event of either type through k-1.
// Label 1 iff the unit has a competing event exactly at k.
AtRiskSample competing_at_risk(const Dataset& ds, int k, int a);

// Main at-risk set at step k: no main event through k-1 and no competing
// event through k. Label 1 iff the unit has a main event exactly at k.
AtRiskSample main_at_risk(const Dataset& ds, int k, int a);

// Feature block for the rows of an at-risk sample.
Matrix at_risk_features(const Dataset& ds, const AtRiskSample& s);

enum class Violation : std::uint8_t {
    OutOfRangeTime,
    InconsistentEventFlag,
    ArmNotBinary,
};

struct ViolationReport {
    std::size_t index;
    Violation kind;
};

std::vector<ViolationReport> validate(const Dataset& ds);

// CSV: header `x0,...,x{d-1},a,t,e` with e in {Y, D, none}; strict parse.
Dataset read_dataset_csv(std::istream& in, int horizon);
Dataset read_dataset_csv(const std::string& path, int horizon);
void write_dataset_csv(const Dataset& ds, std::ostream& out);
void write_dataset_csv(const Dataset& ds, const std::string& path);

}  // namespace riskshift
