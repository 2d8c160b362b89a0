#pragma once

#include <string>
#include <vector>

#include "mvopt/catalog.hpp"

namespace mvopt {

struct Workload {
  std::string name;
  std::string description;
  Catalog catalog;
  std::string views;  // one view per line
};

/// Star-schema catalog with TPC-D table shapes at roughly scale 0.1.
Catalog star_catalog();

/// Every bundled workload, in a fixed order.
std::vector<Workload> bundled_workloads();
const Workload& find_workload(const std::string& name);
std::vector<std::string> workload_names();

/// Small catalogs and view sets for the desk-scale executor checks (at most
/// six relations and fifty rows per relation).
std::vector<Workload> desk_workloads();

}  // namespace mvopt
