#include "totopo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "totopo/error.hpp"
#include "text_util.hpp"

namespace totopo {

TimeSeries::TimeSeries(std::vector<std::vector<double>> channels) : channels_(std::move(channels)) {
  if (channels_.empty()) throw ShapeError("time series needs at least one channel");
  const std::size_t n = channels_.front().size();
  if (n == 0) throw ShapeError("time series needs at least one sample");
  for (const auto& ch : channels_) {
    if (ch.size() != n) throw ShapeError("time series channels differ in length");
    for (double v : ch) {
      if (!std::isfinite(v)) throw ShapeError("time series contains a non-finite value");
    }
  }
}

TimeSeries TimeSeries::univariate(std::vector<double> values) {
  std::vector<std::vector<double>> channels;
  channels.push_back(std::move(values));
  return TimeSeries(std::move(channels));
}

const char* to_string(Split split) { return split == Split::train ? "train" : "test"; }

void LabeledDataset::validate() const {
  if (instances.size() != labels.size())
    throw ContractError("dataset has " + std::to_string(instances.size()) + " instances but " +
                        std::to_string(labels.size()) + " labels");
  if (class_count <= 0) throw ContractError("dataset class_count must be positive");
  if (!class_names.empty() && static_cast<int>(class_names.size()) != class_count)
    throw ContractError("class_names does not match class_count");
  for (int y : labels) {
    if (y < 0 || y >= class_count)
      throw ContractError("label " + std::to_string(y) + " outside 0.." +
                          std::to_string(class_count - 1));
  }
  for (const auto& ts : instances) {
    if (ts.length() != length() || ts.channel_count() != channel_count())
      throw ContractError("dataset instances differ in shape");
  }
  if (split == Split::train) {
    std::vector<int> seen(static_cast<std::size_t>(class_count), 0);
    for (int y : labels) seen[static_cast<std::size_t>(y)] = 1;
    for (int k = 0; k < class_count; ++k) {
      if (!seen[static_cast<std::size_t>(k)])
        throw ContractError("training split has no instance of class " + std::to_string(k));
    }
  }
}

FileFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".ts" ? FileFormat::ts : FileFormat::csv;
}

namespace {

// Orders label texts numerically when every one parses as a number.
std::vector<std::string> ordered_class_names(const std::vector<std::string>& raw) {
  std::vector<std::string> names(raw);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  bool numeric = true;
  std::map<std::string, double> value;
  for (const auto& n : names) {
    auto v = detail::parse_real(n);
    if (!v) {
      numeric = false;
      break;
    }
    value[n] = *v;
  }
  if (numeric) {
    std::stable_sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
      return value[a] < value[b];
    });
  }
  return names;
}

LabeledDataset assemble(std::vector<TimeSeries> instances, const std::vector<std::string>& raw_labels,
                        Split split) {
  if (instances.empty()) throw FormatError("dataset contains no instances");
  LabeledDataset ds;
  ds.split = split;
  ds.class_names = ordered_class_names(raw_labels);
  ds.class_count = static_cast<int>(ds.class_names.size());
  std::map<std::string, int> index;
  for (std::size_t k = 0; k < ds.class_names.size(); ++k) index[ds.class_names[k]] = static_cast<int>(k);
  for (const auto& l : raw_labels) ds.labels.push_back(index.at(l));
  ds.instances = std::move(instances);
  return ds;
}

std::vector<double> parse_values(const std::vector<std::string_view>& fields, std::size_t first,
                                 std::size_t line_no) {
  std::vector<double> out;
  out.reserve(fields.size() - first);
  for (std::size_t i = first; i < fields.size(); ++i) {
    auto v = detail::parse_real(detail::trim(fields[i]));
    if (!v) throw FormatError("cannot parse value '" + std::string(fields[i]) + "'", line_no);
    if (!std::isfinite(*v)) throw FormatError("non-finite value", line_no);
    out.push_back(*v);
  }
  return out;
}

bool skip_line(std::string_view t) { return t.empty() || t.front() == '#'; }

bool is_multivariate_header(std::string_view t) {
  auto fields = detail::split(t, ',');
  if (fields.empty()) return false;
  std::string first(detail::trim(fields.front()));
  std::transform(first.begin(), first.end(), first.begin(), [](unsigned char c) { return std::tolower(c); });
  return first == "instance";
}

}  // namespace

LabeledDataset parse_csv(std::string_view text, Split split) {
  auto lines = detail::split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && skip_line(detail::trim(lines[i]))) ++i;
  if (i == lines.size()) throw FormatError("empty dataset file");

  std::vector<TimeSeries> instances;
  std::vector<std::string> labels;
  std::size_t length = 0;

  auto check_length = [&](std::size_t n, std::size_t line_no) {
    if (n == 0) throw FormatError("row has no samples", line_no);
    if (length == 0) length = n;
    if (n != length)
      throw ShapeError("row at line " + std::to_string(line_no) + " has " + std::to_string(n) +
                       " samples, expected " + std::to_string(length));
  };

  if (is_multivariate_header(detail::trim(lines[i]))) {
    std::string current_id;
    std::string current_label;
    std::vector<std::vector<double>> channels;
    std::size_t channel_count = 0;
    auto flush = [&]() {
      if (channels.empty()) return;
      if (channel_count == 0) channel_count = channels.size();
      if (channels.size() != channel_count)
        throw ShapeError("instance '" + current_id + "' has " + std::to_string(channels.size()) +
                         " channels, expected " + std::to_string(channel_count));
      instances.emplace_back(std::move(channels));
      labels.push_back(current_label);
      channels.clear();
    };
    for (++i; i < lines.size(); ++i) {
      const std::size_t line_no = i + 1;
      auto t = detail::trim(lines[i]);
      if (skip_line(t)) continue;
      auto fields = detail::split(t, ',');
      if (fields.size() < 3) throw FormatError("expected instance,label,values...", line_no);
      std::string id(detail::trim(fields[0]));
      std::string label(detail::trim(fields[1]));
      if (id.empty() || label.empty()) throw FormatError("empty instance id or label", line_no);
      auto values = parse_values(fields, 2, line_no);
      check_length(values.size(), line_no);
      if (id != current_id) {
        flush();
        current_id = id;
        current_label = label;
      } else if (label != current_label) {
        throw FormatError("instance '" + id + "' changes label between channel rows", line_no);
      }
      channels.push_back(std::move(values));
    }
    flush();
  } else {
    for (; i < lines.size(); ++i) {
      const std::size_t line_no = i + 1;
      auto t = detail::trim(lines[i]);
      if (skip_line(t)) continue;
      auto fields = detail::split(t, ',');
      if (fields.size() < 2) throw FormatError("expected label,values...", line_no);
      std::string label(detail::trim(fields[0]));
      if (label.empty()) throw FormatError("empty label", line_no);
      auto values = parse_values(fields, 1, line_no);
      check_length(values.size(), line_no);
      instances.push_back(TimeSeries::univariate(std::move(values)));
      labels.push_back(label);
    }
  }
  return assemble(std::move(instances), labels, split);
}

LabeledDataset parse_ts(std::string_view text, Split split) {
  auto lines = detail::split_lines(text);
  bool in_data = false;
  bool has_labels = true;
  std::string problem;
  std::vector<TimeSeries> instances;
  std::vector<std::string> labels;
  std::size_t length = 0;
  std::size_t channel_count = 0;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto t = detail::trim(lines[i]);
    if (skip_line(t)) continue;
    if (!in_data) {
      if (t.front() != '@') throw FormatError("expected a header directive before @data", line_no);
      auto words = detail::split_whitespace(t);
      std::string key(words.front());
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
      auto flag = [&]() {
        if (words.size() < 2) throw FormatError("directive " + key + " needs a value", line_no);
        std::string v(words[1]);
        std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
        return v == "true";
      };
      if (key == "@data") {
        in_data = true;
      } else if (key == "@problemname" && words.size() > 1) {
        problem = std::string(words[1]);
      } else if (key == "@classlabel") {
        has_labels = flag();
      } else if (key == "@timestamps") {
        if (flag()) throw FormatError("time-stamped .ts data is not supported", line_no);
      } else if (key == "@missing") {
        // Values are still checked individually below.
      }
      continue;
    }
    if (!has_labels) throw FormatError("unlabelled .ts data cannot be used for classification", line_no);
    auto parts = detail::split(t, ':');
    if (parts.size() < 2) throw FormatError("expected channels followed by ':label'", line_no);
    std::string label(detail::trim(parts.back()));
    if (label.empty()) throw FormatError("empty class label", line_no);
    std::vector<std::vector<double>> channels;
    for (std::size_t c = 0; c + 1 < parts.size(); ++c) {
      auto fields = detail::split(detail::trim(parts[c]), ',');
      for (auto f : fields) {
        if (detail::trim(f) == "?") throw FormatError("missing values are not supported", line_no);
      }
      auto values = parse_values(fields, 0, line_no);
      if (values.empty()) throw FormatError("empty channel", line_no);
      if (length == 0) length = values.size();
      if (values.size() != length)
        throw ShapeError("series at line " + std::to_string(line_no) + " has length " +
                         std::to_string(values.size()) + ", expected " + std::to_string(length));
      channels.push_back(std::move(values));
    }
    if (channel_count == 0) channel_count = channels.size();
    if (channels.size() != channel_count)
      throw ShapeError("series at line " + std::to_string(line_no) + " has " +
                       std::to_string(channels.size()) + " channels, expected " +
                       std::to_string(channel_count));
    instances.emplace_back(std::move(channels));
    labels.push_back(label);
  }
  if (!in_data) throw FormatError("missing @data section");
  auto ds = assemble(std::move(instances), labels, split);
  ds.name = problem;
  return ds;
}

LabeledDataset load_dataset(const std::filesystem::path& path, FileFormat format, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  LabeledDataset ds = format == FileFormat::ts ? parse_ts(text, split) : parse_csv(text, split);
  if (ds.name.empty()) {
    std::string stem = path.stem().string();
    for (const char* suffix : {"_TRAIN", "_TEST"}) {
      const std::string s(suffix);
      if (stem.size() > s.size() && stem.compare(stem.size() - s.size(), s.size(), s) == 0) {
        stem.resize(stem.size() - s.size());
        break;
      }
    }
    ds.name = stem;
  }
  return ds;
}

LabeledDataset load_dataset(const std::filesystem::path& path, Split split) {
  return load_dataset(path, format_from_path(path), split);
}

std::string format_csv(const LabeledDataset& dataset) {
  std::string out;
  const bool multivariate = dataset.channel_count() > 1;
  auto label_text = [&](int y) {
    return dataset.class_names.empty() ? std::to_string(y)
                                       : dataset.class_names.at(static_cast<std::size_t>(y));
  };
  if (multivariate) out += "instance,label,values...\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& ts = dataset.instances[i];
    for (std::size_t c = 0; c < ts.channel_count(); ++c) {
      if (multivariate) {
        out += std::to_string(i);
        out += ',';
      }
      out += label_text(dataset.labels[i]);
      for (double v : ts.channel(c)) {
        out += ',';
        out += detail::format_real(v);
      }
      out += '\n';
    }
  }
  return out;
}

void save_csv(const LabeledDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << format_csv(dataset);
}

LabeledDataset align_labels(const LabeledDataset& reference, const LabeledDataset& other) {
  std::map<std::string, int> index;
  for (std::size_t k = 0; k < reference.class_names.size(); ++k)
    index[reference.class_names[k]] = static_cast<int>(k);
  LabeledDataset out = other;
  out.class_names = reference.class_names;
  out.class_count = reference.class_count;
  for (std::size_t i = 0; i < other.labels.size(); ++i) {
    const std::string& name = other.class_names.at(static_cast<std::size_t>(other.labels[i]));
    auto it = index.find(name);
    if (it == index.end()) throw ContractError("class '" + name + "' does not occur in the reference split");
    out.labels[i] = it->second;
  }
  return out;
}

}  // namespace totopo
