#include "famstream/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "famstream/error.hpp"

namespace famstream {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

std::string at_line(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

double parse_number(std::string_view text, std::size_t line_no, std::string_view column) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw_data(at_line(line_no) + "column " + std::string(column) + ": cannot parse '" + std::string(text) + "'");
    }
    if (!std::isfinite(value)) {
        throw_data(at_line(line_no) + "column " + std::string(column) + ": non-finite value '" + std::string(text) +
                   "'");
    }
    return value;
}

template <typename Fn>
void with_line_context(std::size_t line_no, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        const std::string what = e.what();
        if (what.rfind("line ", 0) == 0) throw;
        throw Error(e.kind(), at_line(line_no) + what);
    }
}

}  // namespace

YearMonth YearMonth::parse(std::string_view text) {
    YearMonth ym;
    if (text.size() != 7 || text[4] != '-') throw_data("invalid year-month '" + std::string(text) + "'");
    const auto y = std::from_chars(text.data(), text.data() + 4, ym.year);
    const auto m = std::from_chars(text.data() + 5, text.data() + 7, ym.month);
    if (y.ec != std::errc() || y.ptr != text.data() + 4 || m.ec != std::errc() || m.ptr != text.data() + 7 ||
        ym.month < 1 || ym.month > 12) {
        throw_data("invalid year-month '" + std::string(text) + "'");
    }
    return ym;
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

Dataset::Dataset(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw_data("dataset dimension must be positive");
}

void Dataset::add(Sample sample) {
    if (sample.features.size() != dim_) {
        throw_data("sample '" + sample.id + "': dimension " + std::to_string(sample.features.size()) +
                   " does not match dataset dimension " + std::to_string(dim_));
    }
    for (std::size_t j = 0; j < dim_; ++j) {
        if (!std::isfinite(sample.features[j])) {
            throw_data("sample '" + sample.id + "': non-finite value in feature " + std::to_string(j));
        }
    }
    if (sample.id.empty()) throw_data("sample id must not be empty");
    if (!ids_.insert(sample.id).second) throw_data("duplicate sample id '" + sample.id + "'");
    samples_.push_back(std::move(sample));
}

Matrix Dataset::feature_matrix() const {
    Matrix m = Matrix::with_cols(dim_);
    m.reserve_rows(samples_.size());
    for (const auto& s : samples_) m.push_row(s.features);
    return m;
}

std::vector<std::string> Dataset::ids() const {
    std::vector<std::string> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.id);
    return out;
}

bool Dataset::has_labels() const {
    return !samples_.empty() && std::all_of(samples_.begin(), samples_.end(), [](const Sample& s) { return s.family.has_value(); });
}

FileFormat format_from_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return (ext == ".jsonl" || ext == ".json") ? FileFormat::jsonl : FileFormat::csv;
}

Dataset load_dataset(const std::filesystem::path& path) { return load_dataset(path, format_from_path(path)); }

Dataset load_dataset(const std::filesystem::path& path, FileFormat format) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open '" + path.string() + "'");
    try {
        return format == FileFormat::csv ? read_csv(in) : read_jsonl(in);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw_data("line 1: missing header");
    const auto header = split_commas(strip_cr(line));
    if (header.size() < 4 || header[0] != "id" || header[1] != "family" || header[2] != "first_seen") {
        throw_data("line 1: header must be id,family,first_seen followed by at least one feature column");
    }
    const std::size_t dim = header.size() - 3;
    Dataset data(dim);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = strip_cr(line);
        if (text.empty()) continue;
        const auto cells = split_commas(text);
        if (cells.size() != header.size()) {
            throw_data(at_line(line_no) + "expected " + std::to_string(header.size()) + " fields, found " +
                       std::to_string(cells.size()));
        }
        Sample s;
        s.id = std::string(cells[0]);
        if (!cells[1].empty()) s.family = std::string(cells[1]);
        with_line_context(line_no, [&] {
            if (!cells[2].empty()) s.first_seen = YearMonth::parse(cells[2]);
        });
        s.features.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) s.features[j] = parse_number(cells[j + 3], line_no, header[j + 3]);
        with_line_context(line_no, [&] { data.add(std::move(s)); });
    }
    return data;
}

Dataset read_jsonl(std::istream& in) {
    std::optional<Dataset> data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = strip_cr(line);
        if (text.find_first_not_of(" \t") == std::string_view::npos) continue;
        with_line_context(line_no, [&] {
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(text);
            } catch (const nlohmann::json::exception& e) {
                throw_data(std::string("malformed JSON: ") + e.what());
            }
            if (!obj.is_object() || !obj.contains("id") || !obj.contains("features") || !obj["features"].is_array()) {
                throw_data("object must carry 'id' and a 'features' array");
            }
            Sample s;
            s.id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
            if (auto it = obj.find("family"); it != obj.end() && it->is_string() && !it->get<std::string>().empty()) {
                s.family = it->get<std::string>();
            }
            if (auto it = obj.find("first_seen"); it != obj.end() && it->is_string() && !it->get<std::string>().empty()) {
                s.first_seen = YearMonth::parse(it->get<std::string>());
            }
            for (const auto& v : obj["features"]) {
                if (!v.is_number()) throw_data("non-numeric feature value " + v.dump());
                const double x = v.get<double>();
                if (!std::isfinite(x)) throw_data("non-finite feature value");
                s.features.push_back(x);
            }
            if (!data) data.emplace(s.features.size());
            data->add(std::move(s));
        });
    }
    if (!data) throw_data("no samples in JSONL input");
    return std::move(*data);
}

std::string format_double(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_csv(const Dataset& data, std::ostream& out) {
    out << "id,family,first_seen";
    for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << j;
    out << '\n';
    for (const auto& s : data.samples()) {
        out << s.id << ',' << s.family.value_or("") << ',' << (s.first_seen ? s.first_seen->to_string() : "");
        for (double v : s.features) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_jsonl(const Dataset& data, std::ostream& out) {
    for (const auto& s : data.samples()) {
        nlohmann::json obj;
        obj["id"] = s.id;
        obj["family"] = s.family.value_or("");
        obj["first_seen"] = s.first_seen ? s.first_seen->to_string() : "";
        obj["features"] = s.features;
        out << obj.dump() << '\n';
    }
}

std::pair<Dataset, Dataset> split_by_time(const Dataset& data, YearMonth cutoff) {
    std::vector<std::string> missing;
    for (const auto& s : data.samples()) {
        if (!s.first_seen) missing.push_back(s.id);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
        throw_data("split_by_time: samples without first_seen: " + list);
    }

    Dataset corpus(data.dim());
    std::vector<std::size_t> later;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (*data[i].first_seen < cutoff) {
            corpus.add(data[i]);
        } else {
            later.push_back(i);
        }
    }
    std::stable_sort(later.begin(), later.end(),
                     [&](std::size_t a, std::size_t b) { return *data[a].first_seen < *data[b].first_seen; });
    Dataset stream(data.dim());
    for (std::size_t i : later) stream.add(data[i]);
    return {std::move(corpus), std::move(stream)};
}

std::string_view to_string(Route route) { return route == Route::known ? "known" : "new"; }

void write_assignments_csv(const std::vector<RouteAssignment>& rows, std::ostream& out) {
    out << "sample_id,route,cluster_id\n";
    for (const auto& r : rows) out << r.sample_id << ',' << to_string(r.route) << ',' << r.cluster_id << '\n';
}

}  // namespace famstream
