#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lvlmc/neighborhood.hpp"

namespace lvlmc {

/// n spatial records: a 3-d location plus p attribute values.
struct SampleSet {
    std::vector<Point3> locations;
    Eigen::MatrixXd values;               // n x p
    std::vector<std::string> variable_names;

    int count() const { return static_cast<int>(locations.size()); }
    int attribute_count() const { return static_cast<int>(values.cols()); }

    void validate() const;
};

/// Reads samples from a CSV with header (x,y,z,v1..vp) or from a GSLIB
/// GeoEAS file; the format is sniffed from the first lines.
SampleSet read_samples(const std::string& path);

void write_samples_csv(const std::string& path, const SampleSet& samples);

}  // namespace lvlmc
