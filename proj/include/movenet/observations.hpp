#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace movenet {

/// Telemetry fixes of one individual, time-sorted. error_sd is the isotropic
/// per-coordinate measurement SD of each fix, in the same spatial unit as x, y.
struct Track {
  std::string id;
  std::vector<double> time;
  std::vector<double> x, y;
  std::vector<double> error_sd;

  int size() const { return static_cast<int>(time.size()); }

  void validate() const {
    const std::size_t m = time.size();
    if (x.size() != m || y.size() != m || error_sd.size() != m)
      throw std::invalid_argument("Track '" + id + "': column lengths differ");
    if (m == 0) throw std::invalid_argument("Track '" + id + "': empty");
    for (std::size_t k = 0; k < m; ++k) {
      if (!std::isfinite(time[k]) || !std::isfinite(x[k]) || !std::isfinite(y[k]) ||
          !std::isfinite(error_sd[k]))
        throw std::invalid_argument("Track '" + id + "': non-finite value");
      // zero means an exact fix; file ingestion is stricter and rejects it
      if (!(error_sd[k] >= 0.0))
        throw std::invalid_argument("Track '" + id + "': error_sd must be >= 0");
      if (k > 0 && !(time[k] > time[k - 1]))
        throw std::invalid_argument("Track '" + id + "': times not strictly increasing");
    }
  }
};

/// Asynchronous observations of all individuals. Times share one unit (hours
/// by convention); tracks are keyed by their id strings.
struct ObservationSet {
  std::vector<Track> tracks;
  std::string time_unit = "hours";
  std::string space_unit = "km";

  int n() const { return static_cast<int>(tracks.size()); }

  void validate() const {
    if (tracks.size() < 2)
      throw std::invalid_argument("ObservationSet: need at least two tracks");
    for (const auto& tr : tracks) tr.validate();
    for (std::size_t a = 0; a < tracks.size(); ++a)
      for (std::size_t b = a + 1; b < tracks.size(); ++b)
        if (tracks[a].id == tracks[b].id)
          throw std::invalid_argument("ObservationSet: duplicate id '" + tracks[a].id + "'");
  }
};

}  // namespace movenet
