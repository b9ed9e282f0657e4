#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fblts/mesh.hpp"
#include "fblts/splitting.hpp"
#include "fblts/steppers.hpp"

namespace fblts {

// Ordered from the fine interior outward. FineAdj<l> holds the fine cells
// between (l-1)r+1 and lr hops from the interface.
enum class Region : std::int8_t {
  Fine = 0,
  FineAdj1,
  FineAdj2,
  FineAdj3,
  FineAdj4,
  FineAdj5,
  If1,
  If2,
  CoarseInt,
};

inline bool is_fine(Region r) { return r <= Region::FineAdj5; }
// 0 fine, 1 IF1, 2 IF2, 3 coarse interior
int region_class(Region r);
// Fine layer depth: 1..5 for FineAdj, 6 for the fine interior.
int fine_depth(Region r);
const char *region_name(Region r);

struct LTSLabels {
  std::vector<Region> cellRegion;
  std::vector<Region> edgeRegion;
  std::vector<Region> vertexRegion; // dual cells, for the vorticity companion
  int stencilRadius = 2;
};

LTSLabels label_regions(const Mesh &m, const std::vector<bool> &fineMask,
                        int r = 2);

/// Label an edge or vertex from the regions it touches.
Region closest_to_fine(std::span<const Region> regions);

struct LabelViolation {
  bool onEdge = false;
  Index index = kNoIndex;
  Index offender = kNoIndex; // cell reached by the stencil
  Region region{};
  Region offenderRegion{};
  std::string kind; // "adjacency", "stencil" or "edge-rule"
};

struct LabelReport {
  std::vector<LabelViolation> violations;
  bool ok() const { return violations.empty(); }
};

LabelReport validate_labels(const Mesh &m, const LTSLabels &labels);

// Hop distance from each cell to the nearest cell with seed = true.
std::vector<int> hop_distance(const Mesh &m, const std::vector<bool> &seed);

struct LTSConfig {
  double dt = 0.0;
  int M = 1;
  FBWeights weights;
  void check() const;
};

enum class ExtentPolicy {
  Shrinking,   // F^5, F^4, F^3, F^2, F^1 as the stages proceed
  AllAdjacent, // F^5 for every stage
  WholeFine,   // the whole fine region for every stage
};

/// Uncorrected coarse data on interface one, stored compactly in the order
/// of cells/edges, plus correction accumulators on IF1 and IF2.
struct InterfaceCache {
  std::vector<Index> cells, edges; // IF1
  std::vector<double> hn, h13, h12, h1;
  std::vector<double> un, u13, u12, u1;

  std::vector<Index> accCells, accEdges; // IF1 and IF2
  std::vector<double> sumPsi, sumPhi;
  int summands = 0;
};

/// Predicted interface-one data for subcycle k, compact like the cache.
struct InterfacePrediction {
  int k = 0;
  std::vector<double> h, u;    // t^{n,k}
  std::vector<double> h13, u13; // t^{n,k+1/3}
  std::vector<double> h12, u12; // t^{n,k+1/2}
  std::vector<double> hNext;    // t^{n,k+1}
  std::vector<double> hstar, hss, hsss;
};

/// k in [0, M]; k = M fills only the base level h, u.
InterfacePrediction predict_interface(const InterfaceCache &cache, int k,
                                      int M, const FBWeights &w);

struct StageExtents {
  std::vector<Index> thickness[3];
  std::vector<Index> velocity[3];
  std::vector<Index> fineCells, fineEdges;
  std::vector<Index> if1Cells, if1Edges;
  std::vector<Index> ifCells, ifEdges; // IF1 and IF2
  std::vector<Index> intCells, intEdges;
};

StageExtents stage_extents(const LTSLabels &labels, ExtentPolicy policy);

/// Per-step side data for the diagnostics and for instrumentation.
struct FbltsStepRecord {
  bool recordPvFlux = false;
  std::vector<double> coarsePvFlux;
  std::vector<std::vector<double>> finePvFlux; // one per subcycle
  // h^{n,k+1} on IF1 as read by the stage-3 average of subcycle k.
  std::vector<std::vector<double>> if1NextReads;
  // Predictions actually applied, one per subcycle.
  std::vector<InterfacePrediction> predictions;
  bool keepPredictions = false;
};

class FbltsStepper {
public:
  FbltsStepper(ShallowWaterSystem &sys, const LTSLabels &labels,
               const LTSConfig &cfg,
               ExtentPolicy policy = ExtentPolicy::Shrinking);

  State step(const State &s, FbltsStepRecord *rec = nullptr);

  // Individual phases. coarse_advance leaves COARSE_INT final in the
  // returned stages (h3/u3) and fills the cache.
  Fbrk32Stages coarse_advance(const State &s, InterfaceCache &cache);
  void fine_advance(const State &s, const Fbrk32Stages &coarse,
                    InterfaceCache &cache, State &out,
                    FbltsStepRecord *rec = nullptr);
  void correct_interface(const State &s, const InterfaceCache &cache,
                         State &out) const;

  /// Fast-tendency evaluations of one step, from the extents alone.
  WorkCounters expected_work() const;

  // Wall time of coarse, fine and correction phases in the last step.
  const std::array<double, 3> &phase_seconds() const { return phaseSeconds_; }

  const StageExtents &extents() const { return ext_; }
  const LTSLabels &labels() const { return *labels_; }
  const LTSConfig &config() const { return cfg_; }

private:
  ShallowWaterSystem *sys_;
  const LTSLabels *labels_;
  LTSConfig cfg_;
  StageExtents ext_;
  std::array<double, 3> phaseSeconds_{};
};

} // namespace fblts
