#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "c2gan/linalg.hpp"
#include "c2gan/mlp.hpp"
#include "c2gan/model.hpp"

namespace c2gan {

/// Two optional views and a one-hot label. At least one view is present.
struct MultiviewExample {
  std::optional<Vector> view1;
  std::optional<Vector> view2;
  Vector label;

  static MultiviewExample make(std::optional<Vector> v1, std::optional<Vector> v2,
                               std::size_t cls, std::size_t num_classes);

  /// Index of the hot label entry.
  std::size_t label_index() const;
  bool complete() const { return view1.has_value() && view2.has_value(); }
  const std::optional<Vector>& view(View v) const { return v == View::One ? view1 : view2; }
  std::optional<Vector>& view(View v) { return v == View::One ? view1 : view2; }

  /// Throws InvariantError on a missing-both or non-one-hot example, and
  /// DimensionError on wrong view lengths.
  void validate(std::size_t d1, std::size_t d2, std::size_t num_classes) const;

  bool operator==(const MultiviewExample&) const = default;
};

/// Training data split by which view is observed.
/// s_missing1 holds examples whose view 1 is absent (completed by gen1), and
/// symmetrically for s_missing2.
struct PartitionedDataset {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t num_classes = 0;
  std::vector<MultiviewExample> s_full;
  std::vector<MultiviewExample> s_missing1;
  std::vector<MultiviewExample> s_missing2;

  std::size_t size() const { return s_full.size() + s_missing1.size() + s_missing2.size(); }
  const std::vector<MultiviewExample>& missing(View v) const {
    return v == View::One ? s_missing1 : s_missing2;
  }

  /// Validates the example and routes it to the subset its views dictate.
  void add(MultiviewExample ex);
  void validate() const;

  bool operator==(const PartitionedDataset&) const = default;
};

struct LoadOptions {
  /// Rescale every present view to unit Euclidean norm (zero views untouched).
  bool l2_normalize = false;
};

/// Reads the sparse multiview text format:
///   #dims d1 d2 K
///   <label>\t<view1>\t<view2>
/// where a view is space-separated `index:value` pairs (0-based, strictly
/// increasing) or `-` when absent.
PartitionedDataset read_multiview(std::istream& in, const LoadOptions& options = {});
PartitionedDataset load_multiview_file(const std::string& path, const LoadOptions& options = {});

void write_multiview(std::ostream& out, const PartitionedDataset& data);
void save_multiview_file(const std::string& path, const PartitionedDataset& data);

/// Wraps complete pairs (e.g. a test set) as a dataset with only s_full filled.
PartitionedDataset as_complete_dataset(std::vector<MultiviewExample> pairs, std::size_t d1,
                                       std::size_t d2, std::size_t num_classes);

/// Gaussian two-view task: view_v = mean_v[class] + view_correlation * A_v u + noise_sigma * e,
/// with shared latent u ~ N(0, I) and e ~ N(0, I).
struct SyntheticSpec {
  std::size_t num_classes = 3;
  std::size_t d1 = 20;
  std::size_t d2 = 20;
  std::vector<Vector> class_means1;
  std::vector<Vector> class_means2;
  double noise_sigma = 1.0;
  double view_correlation = 0.5;
  std::size_t latent_dim = 5;
  std::size_t m_full = 50;
  std::size_t m_missing1 = 500;
  std::size_t m_missing2 = 500;
  std::size_t m_test = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Builds a spec whose class means are random directions scaled to norm
/// `separation1` / `separation2` (drawn from `seed`). Recognised keys:
/// K d1 d2 noise_sigma view_correlation latent_dim separation1 separation2
/// m_full m_missing1 m_missing2 m_test seed.
SyntheticSpec synthetic_spec_from_config(const std::map<std::string, std::string>& config);

enum class ViewSubset { Both, OnlyView1, OnlyView2 };

struct SyntheticData {
  PartitionedDataset train;
  std::vector<MultiviewExample> test;
  double bayes_accuracy = 0.0;
};

/// Mixing matrices A_1, A_2 (d_v x latent_dim) implied by `spec.seed`.
std::pair<Matrix, Matrix> synthetic_mixing(const SyntheticSpec& spec);

/// `count` complete pairs, example i drawn from its own stream seeded by (seed, i).
std::vector<MultiviewExample> sample_complete_pairs(const SyntheticSpec& spec, std::size_t count,
                                                    std::uint64_t seed);

/// Exact Bayes accuracy of the Gaussian mixture using the requested views:
/// closed form for two classes, Monte Carlo (1e5 draws) otherwise.
double bayes_accuracy(const SyntheticSpec& spec, ViewSubset views = ViewSubset::Both);

/// Samples a dataset for the task described by `spec`. `data_seed` picks the
/// draw of examples and the split; the task itself (means, mixing) stays fixed.
SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t data_seed);
SyntheticData generate_synthetic(const SyntheticSpec& spec);

struct ProtocolSplit {
  PartitionedDataset train;
  std::vector<MultiviewExample> test;
};

/// Random disjoint draw of m_full complete pairs, m_missing1 pairs with view 1
/// deleted and m_missing2 pairs with view 2 deleted; the rest is the test set.
ProtocolSplit split_for_protocol(const std::vector<MultiviewExample>& pool, std::size_t d1,
                                 std::size_t d2, std::size_t num_classes, std::size_t m_full,
                                 std::size_t m_missing1, std::size_t m_missing2,
                                 std::uint64_t seed);

/// Deterministic child seed for stream `index` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace c2gan
