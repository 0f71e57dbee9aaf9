#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "famstream/matrix.hpp"

namespace famstream {

// First-seen date at month granularity.
struct YearMonth {
    int year = 0;
    int month = 1;

    // Accepts "YYYY-MM". Throws a data error otherwise.
    static YearMonth parse(std::string_view text);
    std::string to_string() const;

    auto operator<=>(const YearMonth&) const = default;
};

struct Sample {
    std::string id;
    Vector features;
    // Ground truth; only the metrics code looks at it.
    std::optional<std::string> family;
    std::optional<YearMonth> first_seen;

    bool operator==(const Sample&) const = default;
};

// Ordered samples of a single feature dimension. Every sample is validated on
// insertion: matching dim, finite values, unique id.
class Dataset {
public:
    explicit Dataset(std::size_t dim);

    void add(Sample sample);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const std::vector<Sample>& samples() const noexcept { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }

    Matrix feature_matrix() const;
    std::vector<std::string> ids() const;
    bool has_labels() const;

    bool operator==(const Dataset& other) const { return dim_ == other.dim_ && samples_ == other.samples_; }

private:
    std::size_t dim_;
    std::vector<Sample> samples_;
    std::unordered_set<std::string> ids_;
};

enum class FileFormat { csv, jsonl };

// Picks the format from the extension (.jsonl/.json -> jsonl, anything else csv).
FileFormat format_from_path(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, FileFormat format);
Dataset load_dataset(const std::filesystem::path& path);
Dataset read_csv(std::istream& in);
Dataset read_jsonl(std::istream& in);

// Output is loss-free: doubles use the shortest round-trip representation.
void write_csv(const Dataset& data, std::ostream& out);
void write_jsonl(const Dataset& data, std::ostream& out);

// Corpus gets first_seen < cutoff in input order; the stream gets the rest,
// stably sorted by first_seen.
std::pair<Dataset, Dataset> split_by_time(const Dataset& data, YearMonth cutoff);

enum class Route { known, new_family };

std::string_view to_string(Route route);

struct RouteAssignment {
    std::string sample_id;
    Route route = Route::known;
    int cluster_id = -1;

    bool operator==(const RouteAssignment&) const = default;
};

// `sample_id,route,cluster_id` rows with a header.
void write_assignments_csv(const std::vector<RouteAssignment>& rows, std::ostream& out);

std::string format_double(double value);

}  // namespace famstream
