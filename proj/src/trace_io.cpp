#include "hysync/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace hysync {
namespace {

void put(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += buf;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(std::string_view field, std::size_t line_no) {
  const std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw TraceIoError("trace line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

int edge_index(const GeneralGraph& g, int tail, int head) {
  for (int l = 0; l < g.num_edges(); ++l) {
    const Edge& e = g.edges()[static_cast<std::size_t>(l)];
    if (e.tail == tail && e.head == head) return l;
  }
  return -1;
}

template <typename Writer>
void write_file(const std::filesystem::path& path, const Writer& writer) {
  std::ofstream os(path);
  if (!os) throw TraceIoError("cannot open " + path.string() + " for writing");
  writer(os);
  if (!os) throw TraceIoError("write to " + path.string() + " failed");
}

}  // namespace

void write_trace_csv(std::ostream& os, const SolutionTrace& trace) {
  std::string line = "t,j";
  for (int i = 1; i <= trace.num_nodes; ++i) line += ",theta_" + std::to_string(i);
  for (int l = 1; l <= trace.num_edges; ++l) line += ",q_" + std::to_string(l);
  line += ",V,mismatch_inf,event\n";
  os << line;
  for (const TraceSample& s : trace.samples) {
    line.clear();
    put(line, s.t);
    line += ',' + std::to_string(s.j);
    for (Eigen::Index i = 0; i < s.x.theta.size(); ++i) {
      line += ',';
      put(line, s.x.theta(i));
    }
    for (Eigen::Index l = 0; l < s.x.q.size(); ++l) line += ',' + std::to_string(s.x.q(l));
    line += ',';
    put(line, s.V);
    line += ',';
    put(line, s.mismatch_inf);
    line += ',' + s.event + '\n';
    os << line;
  }
}

void write_trace_csv(const std::filesystem::path& path, const SolutionTrace& trace) {
  write_file(path, [&](std::ostream& os) { write_trace_csv(os, trace); });
}

SolutionTrace read_trace_csv(std::istream& is, const GeneralGraph* graph) {
  std::string line;
  if (!std::getline(is, line)) throw TraceIoError("empty trace file");
  const auto header = split(line);
  SolutionTrace trace;
  for (std::string_view h : header) {
    if (h.rfind("theta_", 0) == 0) ++trace.num_nodes;
    if (h.rfind("q_", 0) == 0) ++trace.num_edges;
  }
  const std::size_t width = 2 + static_cast<std::size_t>(trace.num_nodes + trace.num_edges) + 3;
  if (header.size() != width || header[0] != "t" || header[1] != "j" || header.back() != "event")
    throw TraceIoError("unrecognized trace header");
  if (graph && (graph->num_nodes() != trace.num_nodes || graph->num_edges() != trace.num_edges))
    throw TraceIoError("trace dimensions do not match the graph");

  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != width) throw TraceIoError("trace line " + std::to_string(line_no) + ": wrong field count");
    TraceSample s;
    s.t = to_double(f[0], line_no);
    s.j = static_cast<int>(to_double(f[1], line_no));
    s.x.theta.resize(trace.num_nodes);
    s.x.q.resize(trace.num_edges);
    std::size_t k = 2;
    for (int i = 0; i < trace.num_nodes; ++i) s.x.theta(i) = to_double(f[k++], line_no);
    for (int l = 0; l < trace.num_edges; ++l) s.x.q(l) = static_cast<int>(to_double(f[k++], line_no));
    s.V = to_double(f[k++], line_no);
    s.mismatch_inf = to_double(f[k++], line_no);
    s.event = std::string(f[k]);

    if (!trace.samples.empty() && s.j == trace.samples.back().j + 1) {
      JumpEvent ev;
      ev.pre = trace.samples.back().x;
      ev.post = {s.x};
      ev.t = s.t;
      ev.j = trace.samples.back().j;
      int a = 0, b = 0;
      if (std::sscanf(s.event.c_str(), "edge:%d-%d", &a, &b) == 2) {
        ev.kind = JumpKind::EdgeUnwind;
        ev.index = graph ? edge_index(*graph, a - 1, b - 1) : -1;
      } else if (std::sscanf(s.event.c_str(), "wrap:%d", &a) == 1) {
        ev.kind = JumpKind::PhaseWrap;
        ev.index = a - 1;
      } else {
        throw TraceIoError("trace line " + std::to_string(line_no) + ": jump row without event tag");
      }
      trace.jump_events.push_back(std::move(ev));
    }
    trace.samples.push_back(std::move(s));
  }
  if (trace.samples.empty()) throw TraceIoError("trace has no samples");

  DwellStats& d = trace.dwell;
  d.jump_count = static_cast<int>(trace.jump_events.size());
  d.flow_time = trace.samples.back().t - trace.samples.front().t;
  d.jump_density = d.flow_time > 0.0 ? d.jump_count / d.flow_time : 0.0;
  int burst = 0;
  for (std::size_t k = 0; k < trace.jump_events.size(); ++k) {
    burst = (k > 0 && trace.jump_events[k].t == trace.jump_events[k - 1].t) ? burst + 1 : 1;
    d.max_burst = std::max(d.max_burst, burst);
  }
  return trace;
}

SolutionTrace read_trace_csv(const std::filesystem::path& path, const GeneralGraph* graph) {
  std::ifstream is(path);
  if (!is) throw TraceIoError("cannot open " + path.string());
  return read_trace_csv(is, graph);
}

double radial_r(double t) { return 1.0 / (1.55 * std::sqrt(t) + 0.66); }

void write_radial_csv(std::ostream& os, const SolutionTrace& trace) {
  std::string line = "t,r";
  for (int i = 1; i <= trace.num_nodes; ++i) line += ",x_" + std::to_string(i) + ",y_" + std::to_string(i);
  os << line << '\n';
  for (const TraceSample& s : trace.samples) {
    if (!s.event.empty()) continue;
    const double r = radial_r(s.t);
    line.clear();
    put(line, s.t);
    line += ',';
    put(line, r);
    for (Eigen::Index i = 0; i < s.x.theta.size(); ++i) {
      line += ',';
      put(line, r * std::cos(s.x.theta(i)));
      line += ',';
      put(line, r * std::sin(s.x.theta(i)));
    }
    os << line << '\n';
  }
}

void write_radial_csv(const std::filesystem::path& path, const SolutionTrace& trace) {
  write_file(path, [&](std::ostream& os) { write_radial_csv(os, trace); });
}

}  // namespace hysync
