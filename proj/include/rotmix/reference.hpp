#pragma once

#include "rotmix/transport.hpp"

namespace rotmix::reference {

// Serial counterparts of the OpenMP kernels, written as plain loops with
// the same per-row arithmetic order. Tests assert bit-identical agreement
// with the parallel versions; the bench target compares their throughput.

CostMatrix cost_matrix(const Family& family, const MixtureModel& model,
                       const Dataset& data);

TransportPlan estep_hard(const CostMatrix& gamma, const Vec& upsilon);

TransportPlan estep_entropic_from_cost(const CostMatrix& gamma, const Vec& upsilon,
                                       double lambda);

TransportPlan estep_quadratic(const CostMatrix& gamma, const Vec& upsilon,
                              double lambda);

Mat m_step(const Family& family, const TransportPlan& plan, const Vec& omega,
           const Dataset& data);

double objective_from_cost(const TransportPlan& plan, const CostMatrix& gamma,
                           const RegularizerSpec& reg);

}  // namespace rotmix::reference
