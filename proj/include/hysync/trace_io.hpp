#ifndef HYSYNC_TRACE_IO_HPP_
#define HYSYNC_TRACE_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "hysync/graph.hpp"
#include "hysync/integrator.hpp"

namespace hysync {

class TraceIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header t,j,theta_1..theta_n,q_1..q_m,V,mismatch_inf,event; numbers printed with 17 digits.
void write_trace_csv(std::ostream& os, const SolutionTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const SolutionTrace& trace);

/// Rebuilds samples, jump events (pre = previous row) and dwell counters. Auxiliary
/// state is not serialized. With a graph, edge tags resolve to edge indices; otherwise
/// edge events carry index -1.
SolutionTrace read_trace_csv(std::istream& is, const GeneralGraph* graph = nullptr);
SolutionTrace read_trace_csv(const std::filesystem::path& path, const GeneralGraph* graph = nullptr);

/// Radius of the polar phase plot: (1.55 sqrt(t) + 0.66)^-1.
double radial_r(double t);

/// t,r,x_1,y_1,...,x_n,y_n with (x_i, y_i) = r(t) (cos theta_i, sin theta_i); flow samples only.
void write_radial_csv(std::ostream& os, const SolutionTrace& trace);
void write_radial_csv(const std::filesystem::path& path, const SolutionTrace& trace);

}  // namespace hysync

#endif  // HYSYNC_TRACE_IO_HPP_
