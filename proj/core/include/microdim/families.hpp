#pragma once

// Ball-tree families x -> C(x) inside a finite net of a compact metric space: each level
// refines a union of separated balls, so C(x) moves continuously with x while its upper box
// (or packing) dimension tracks phi along x.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "microdim/metric.hpp"
#include "microdim/rational.hpp"
#include "microdim/realize.hpp"
#include "microdim/seq.hpp"
#include "microdim/target.hpp"

namespace microdim {

/// A finite net of K with its metric, resolution and distinguished point y0. Packing
/// counts are greedy over points in index order, so every count is realized by a concrete
/// canonical packing.
class MetricSpaceView {
 public:
  MetricSpaceView(std::shared_ptr<const FiniteMetricSpace> space, double epsilon, std::size_t origin);

  const FiniteMetricSpace& space() const { return *space_; }
  double epsilon() const { return epsilon_; }
  std::size_t origin() const { return origin_; }
  std::size_t size() const { return space_->size(); }

  /// B(y, 2^-level) on the net, ascending.
  std::vector<std::size_t> ball(std::size_t y, int level) const;
  /// P_n(K): size of the greedy maximal 2^-n-packing of the whole net (cached).
  std::uint64_t packing_number(int n) const;
  /// g(n) = max{n + 1, P_n(K)}.
  std::uint64_t level_function(int n) const;
  /// The first `limit` points of the greedy 2^-level-packing of `points` (all when limit = 0).
  std::vector<std::size_t> packing_in(const std::vector<std::size_t>& points, int level,
                                      std::size_t limit = 0) const;

  bool check_axioms(std::size_t samples, std::uint64_t seed) const { return space_->check_axioms(samples, seed); }

 private:
  struct Cache;
  std::shared_ptr<const FiniteMetricSpace> space_;
  double epsilon_;
  std::size_t origin_;
  std::shared_ptr<Cache> cache_;
};

/// side^d grid points i / side with the given metric; y0 is the point nearest the centre.
MetricSpaceView grid_view(int d, std::size_t side, PointMetric metric);

/// 2^-level as a distance; 0 once it underflows.
double scale(int level);

/// floor(2^e) for e >= 0, and whether 2^e is an integer. Throws ResourceExhausted past 2^63.
std::pair<std::uint64_t, bool> pow2_floor(const Rational& e);
/// count >= 2^e, exactly.
bool count_reaches(std::uint64_t count, const Rational& e);

enum class FamilyVariant { box, packing };

struct LevelWitness {
  int n = 0;
  std::uint64_t g = 0;        // g(k_n)
  int j = 0;                  // witness scale (largest over y for the packing variant)
  std::size_t y = 0;          // the point attaining j
  std::uint64_t packing = 0;  // P_j(B(y, 2^-g)) found
};

struct KSeq {
  FamilyVariant variant = FamilyVariant::box;
  std::vector<Rational> alphas;  // alpha_n, n = 0..levels-1
  std::vector<int> k;            // k_0 = 0, ..., k_levels
  std::vector<LevelWitness> witnesses;

  int levels() const { return static_cast<int>(witnesses.size()); }
  /// Gap below k_{n+1} that ell must respect: 3 (box) or 2 (packing).
  int gap() const { return variant == FamilyVariant::box ? 3 : 2; }
};

struct ScheduleOptions {
  /// Largest admissible k_{n+1}; deeper schedules fail.
  int max_level = 1000;
  unsigned threads = 0;
};

/// k_{n+1} = (least witness j >= g(k_n) with P_j(B(y, 2^-g(k_n))) >= 2^(alpha_n j)) + gap,
/// for y = y0 (box) or the worst y over the net (packing). Throws ResolutionExhausted with
/// the failing level when the net cannot certify a witness.
KSeq level_schedule(const MetricSpaceView& view, std::vector<Rational> alphas, FamilyVariant variant,
                    const ScheduleOptions& options = {});

struct Extension {
  Rational phi;                            // phi(t) as used (after capping at alpha_n)
  std::vector<int> ell;                    // ell(t), or ell_i(t) per ball
  std::vector<std::uint64_t> sizes;        // floor(2^(phi ell)) per packing
  std::vector<std::vector<std::size_t>> packings;  // T (box, after the swap) or S_i
  bool swapped_existing = false;           // box: y0 replaced a nearby packing point
};

/// The ball union C(s) = union of B(y_i(s), 2^-k_n) for a word s of length n.
struct BallTree {
  FamilyVariant variant = FamilyVariant::box;
  Word prefix;
  int radius_level = 0;  // k_n
  std::vector<std::size_t> centers;
  std::vector<Extension> history;  // one per extension so far

  int level() const { return static_cast<int>(prefix.length()); }
};

BallTree ball_tree_root(const MetricSpaceView& view, FamilyVariant variant);

/// One box-variant step to s^c with the value phi(s^c). Requires phi <= alpha_n.
BallTree extend_box(const MetricSpaceView& view, const KSeq& seq, const BallTree& tree, int c,
                    const Rational& phi);
/// One packing-variant step: every ball is replaced by its own packing.
BallTree extend_packing(const MetricSpaceView& view, const KSeq& seq, const BallTree& tree, int c,
                        const Rational& phi);

/// Exact checks of one tree against its parent: separation > 2^(2-k_n), nested balls, and
/// for the box variant y0 among the centers. Throws InvariantViolation on failure.
void check_ball_tree(const MetricSpaceView& view, const KSeq& seq, const BallTree& tree,
                     const BallTree* parent = nullptr);

struct FamilyTrace {
  FamilyVariant variant = FamilyVariant::box;
  Word prefix;
  std::vector<int> k;  // k_0 .. k_levels
  std::vector<BallTree> trees;  // C(x|0), ..., C(x|levels)

  const std::vector<std::size_t>& centers() const { return trees.back().centers; }
  /// {prefix, levels: [{n, k, centers}]}.
  nlohmann::json to_json() const;
};

/// C(x|0), ..., C(x|levels) with phi(t) capped at alpha_{|t|-1}; every step is checked.
FamilyTrace family_member(const Word& x, const VarphiMap& varphi, const MetricSpaceView& view,
                          const KSeq& seq, int levels);

/// Hausdorff distance between two finite subsets of the net.
double hausdorff_points(const FiniteMetricSpace& space, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b);

struct CoverRow {
  int n = 0;
  int ell = 0;
  std::uint64_t covering = 0;   // N_ell(C) from a greedy 2^-ell packing of the trace
  std::uint64_t centers = 0;    // m(x|n)
  std::uint64_t ball_part = 0;  // N_ell of the trace inside B(y0, 2^-g(k_n)) (or all balls)
  double bound = 0;             // ell + 2^(phi(x|n+1) ell)
  bool chain_holds = false;     // covering <= centers + ball_part
  bool bound_holds = false;     // centers + ball_part <= bound
};

struct FamilyDimReport {
  bool packings_verified = false;  // separation and exact sizes of every stored packing
  std::vector<CoverRow> rows;
};

/// Re-verifies the stored packings (separation 2^-ell-1 for the box variant, 2^-ell for the
/// packing variant, sizes floor(2^(phi ell))) and tabulates the covering chain at each
/// realized ell in [g(k_n), k_{n+1} - gap].
FamilyDimReport family_dim_report(const MetricSpaceView& view, const KSeq& seq, const FamilyTrace& trace);

struct FamilyLayer {
  int n = 0;
  Rational beta;        // the members here have packing dimension in A ∩ [0, beta]
  double radius = 0;    // they live in B(y0, radius)
  bool joined_with_base = false;  // members are K0 ∪ C
};

struct FamilyDescription {
  enum class Kind { empty, whole_space, layered } kind = Kind::empty;
  Rational top;    // dim_P K
  Rational beta0;  // least target below the top; K0 has this dimension and contains y0
  std::vector<FamilyLayer> layers;

  nlohmann::json to_json() const;
};

/// The assembly C_0 ∪ {K} ∪ {K0 ∪ C : C in C_n, n >= 1} with betas beta_n = top -
/// (top - beta0) 2^-n and C_n inside B(y0, 2^-n). An absent target gives the empty family;
/// the singleton {top} gives {K}.
FamilyDescription packing_family_assembly(const std::optional<TargetSpec>& a, const MetricSpaceView& view,
                                          const Rational& top, int layers);

}  // namespace microdim
