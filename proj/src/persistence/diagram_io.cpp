#include "text_util.hpp"
#include "totopo/error.hpp"
#include "totopo/persistence.hpp"

namespace totopo {

namespace {
constexpr std::string_view kHeader = "# totopo-diagram v1";
}

std::string format_diagram(const PersistenceDiagram& pd) {
  std::string out(kHeader);
  out += " source=";
  out += to_string(pd.source);
  out += '\n';
  for (const auto& p : pd.points) {
    out += std::to_string(p.dim);
    out += ' ';
    out += detail::format_real(p.birth);
    out += ' ';
    out += detail::format_real(p.death);
    out += '\n';
  }
  return out;
}

PersistenceDiagram parse_diagram(std::string_view text) {
  auto lines = detail::split_lines(text);
  if (lines.empty()) throw FormatError("empty diagram file");
  auto header = detail::trim(lines.front());
  if (header.substr(0, kHeader.size()) != kHeader) throw FormatError("missing diagram header", 1);
  PersistenceDiagram pd;
  auto rest = detail::trim(header.substr(kHeader.size()));
  if (rest == "source=direct") {
    pd.source = DiagramSource::direct;
  } else if (rest == "source=rips") {
    pd.source = DiagramSource::rips;
  } else {
    throw FormatError("unknown diagram source '" + std::string(rest) + "'", 1);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto t = detail::trim(lines[i]);
    if (t.empty()) continue;
    auto f = detail::split_whitespace(t);
    if (f.size() != 3) throw FormatError("expected 'dim birth death'", i + 1);
    auto dim = detail::parse_real(f[0]);
    auto b = detail::parse_real(f[1]);
    auto d = detail::parse_real(f[2]);
    if (!dim || !b || !d || (*dim != 0.0 && *dim != 1.0)) throw FormatError("bad diagram point", i + 1);
    if (*d < *b) throw FormatError("death precedes birth", i + 1);
    pd.points.push_back({*b, *d, static_cast<int>(*dim)});
  }
  return pd;
}

}  // namespace totopo
