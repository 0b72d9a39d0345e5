//! Dataset representation, synthetic data generation and client partitioning.

mod io;
mod partition;
mod synthetic;

pub use io::{
    load_attribute_table, load_feature_set, read_matrix_csv, write_attribute_csv,
    write_feature_csv, write_matrix_csv,
};
pub use partition::{
    partition_iid, partition_noniid_dirichlet, partition_pccd, partition_pccd_imbalanced,
    subsample_ratio,
};
pub use synthetic::{estimate_hidden_map, generate_synthetic, SyntheticDataset};

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Class identifier. Classes are numbered `0..n_classes` and index directly
/// into the attribute table.
pub type ClassId = usize;

/// Per-class semantic attribute vectors, shared by every party.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeTable {
    rows: Array2<f64>,
}

impl AttributeTable {
    /// Build a table from an `n_classes × d_a` matrix. Row `j` is the
    /// attribute vector of class `j`.
    pub fn new(rows: Array2<f64>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::Empty("attribute table".into()));
        }
        for (j, row) in rows.rows().into_iter().enumerate() {
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "attribute row for class {} is all-zero",
                    j
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "attribute row for class {} has a non-finite entry",
                    j
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn n_classes(&self) -> usize {
        self.rows.nrows()
    }

    pub fn d_a(&self) -> usize {
        self.rows.ncols()
    }

    /// Attribute vector of one class.
    pub fn row(&self, class: ClassId) -> ArrayView1<'_, f64> {
        self.rows.row(class)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.rows
    }

    /// All class ids, ascending.
    pub fn class_ids(&self) -> Vec<ClassId> {
        (0..self.n_classes()).collect()
    }
}

/// Seen/unseen class split. Both lists are kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    seen: Vec<ClassId>,
    unseen: Vec<ClassId>,
}

impl SplitSpec {
    /// Build a split, checking disjointness and full coverage of the table.
    pub fn new(mut seen: Vec<ClassId>, mut unseen: Vec<ClassId>, table: &AttributeTable) -> Result<Self> {
        seen.sort_unstable();
        unseen.sort_unstable();
        let s: BTreeSet<_> = seen.iter().copied().collect();
        let u: BTreeSet<_> = unseen.iter().copied().collect();
        if s.len() != seen.len() || u.len() != unseen.len() {
            return Err(Error::InvalidArgument("duplicate class id in split".into()));
        }
        if !s.is_disjoint(&u) {
            return Err(Error::InvalidArgument(
                "seen and unseen class sets overlap".into(),
            ));
        }
        let all: BTreeSet<_> = (0..table.n_classes()).collect();
        let union: BTreeSet<_> = s.union(&u).copied().collect();
        if union != all {
            return Err(Error::InvalidArgument(
                "seen ∪ unseen must cover every class in the attribute table".into(),
            ));
        }
        Ok(Self { seen, unseen })
    }

    /// Derive a split from the seen list alone; unseen is the complement.
    pub fn from_seen(seen: Vec<ClassId>, table: &AttributeTable) -> Result<Self> {
        let s: BTreeSet<_> = seen.iter().copied().collect();
        let unseen: Vec<ClassId> = (0..table.n_classes()).filter(|c| !s.contains(c)).collect();
        Self::new(seen, unseen, table)
    }

    pub fn seen(&self) -> &[ClassId] {
        &self.seen
    }

    pub fn unseen(&self) -> &[ClassId] {
        &self.unseen
    }

    /// All class ids (seen ∪ unseen), ascending.
    pub fn all(&self) -> Vec<ClassId> {
        let mut v: Vec<ClassId> = self.seen.iter().chain(self.unseen.iter()).copied().collect();
        v.sort_unstable();
        v
    }
}

/// Labeled visual feature vectors.
///
/// Stored struct-of-arrays: `features` is `n × d_in`, with `ids[i]` and
/// `classes[i]` describing row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    ids: Vec<u64>,
    classes: Vec<ClassId>,
    features: Array2<f64>,
}

impl SampleSet {
    pub fn new(ids: Vec<u64>, classes: Vec<ClassId>, features: Array2<f64>) -> Result<Self> {
        if ids.len() != classes.len() || ids.len() != features.nrows() {
            return Err(Error::Dimension(format!(
                "sample set fields disagree: {} ids, {} classes, {} feature rows",
                ids.len(),
                classes.len(),
                features.nrows()
            )));
        }
        let mut seen = BTreeSet::new();
        for &id in &ids {
            if !seen.insert(id) {
                return Err(Error::InvalidArgument(format!("duplicate sample id {}", id)));
            }
        }
        Ok(Self { ids, classes, features })
    }

    /// Check every class id against the attribute table.
    pub fn validate_against(&self, table: &AttributeTable) -> Result<()> {
        for (&id, &class) in self.ids.iter().zip(&self.classes) {
            if class >= table.n_classes() {
                return Err(Error::InvalidArgument(format!(
                    "sample {} references class {} outside the attribute table",
                    id, class
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn d_in(&self) -> usize {
        self.features.ncols()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn classes(&self) -> &[ClassId] {
        &self.classes
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn id(&self, i: usize) -> u64 {
        self.ids[i]
    }

    pub fn class(&self, i: usize) -> ClassId {
        self.classes[i]
    }

    pub fn feature(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Distinct class ids present in the set, ascending.
    pub fn distinct_classes(&self) -> Vec<ClassId> {
        let set: BTreeSet<ClassId> = self.classes.iter().copied().collect();
        set.into_iter().collect()
    }

    /// New set holding the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> SampleSet {
        let ids = indices.iter().map(|&i| self.ids[i]).collect();
        let classes = indices.iter().map(|&i| self.classes[i]).collect();
        let mut features = Array2::zeros((indices.len(), self.d_in()));
        for (r, &i) in indices.iter().enumerate() {
            features.row_mut(r).assign(&self.features.row(i));
        }
        SampleSet { ids, classes, features }
    }
}

/// Partitioning scheme tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    Pccd,
    PccdImbalanced,
    Iid,
    NoniidDirichlet,
}

/// Parameters a partition was built with, kept for the run manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PartitionParams {
    /// Dirichlet concentration, when a Dirichlet draw was used.
    pub alpha: Option<f64>,
    /// Local data ratio applied by `subsample_ratio`.
    pub rho: Option<f64>,
    /// Local class ratio implied by the partition (max class-set size over |Y^s|).
    pub phi: Option<f64>,
}

/// One client's share: owned classes (sorted) and sample row indices into
/// the train set (sorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientShare {
    pub classes: Vec<ClassId>,
    pub sample_indices: Vec<usize>,
}

/// Assignment of classes and samples to `k` clients.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionPlan {
    pub mode: PartitionMode,
    pub params: PartitionParams,
    shares: Vec<ClientShare>,
}

impl PartitionPlan {
    pub(crate) fn new(mode: PartitionMode, params: PartitionParams, shares: Vec<ClientShare>) -> Self {
        Self { mode, params, shares }
    }

    pub fn n_clients(&self) -> usize {
        self.shares.len()
    }

    pub fn share(&self, client: usize) -> &ClientShare {
        &self.shares[client]
    }

    pub fn shares(&self) -> &[ClientShare] {
        &self.shares
    }

    /// Total number of assigned sample indices across clients.
    pub fn total_samples(&self) -> usize {
        self.shares.iter().map(|s| s.sample_indices.len()).sum()
    }
}

/// Specification of a synthetic ZSL dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_classes: usize,
    pub n_seen: usize,
    /// Attribute dimension.
    pub d_a: usize,
    /// Visual feature dimension of the generated samples.
    pub d_v: usize,
    /// Training samples per seen class.
    pub train_per_class: usize,
    /// Test samples per class (seen and unseen).
    pub test_per_class: usize,
    /// Gaussian noise scale added to features before rectification.
    pub noise: f64,
    /// Classes per correlated attribute block.
    pub attr_block_size: usize,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 || self.d_a < 1 || self.d_v < 1 {
            return Err(Error::InvalidArgument(
                "synthetic spec needs n_classes ≥ 2 and positive dimensions".into(),
            ));
        }
        if self.n_seen >= self.n_classes || self.n_seen == 0 {
            return Err(Error::InvalidArgument(format!(
                "n_seen must satisfy 0 < n_seen < n_classes, got {}/{}",
                self.n_seen, self.n_classes
            )));
        }
        if self.train_per_class == 0 || self.test_per_class == 0 {
            return Err(Error::InvalidArgument(
                "samples per class must be ≥ 1".into(),
            ));
        }
        if self.noise < 0.0 || !self.noise.is_finite() {
            return Err(Error::InvalidArgument("noise scale must be ≥ 0".into()));
        }
        if self.attr_block_size == 0 {
            return Err(Error::InvalidArgument("attr_block_size must be ≥ 1".into()));
        }
        Ok(())
    }
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_classes: 30,
            n_seen: 25,
            d_a: 16,
            d_v: 32,
            train_per_class: 40,
            test_per_class: 10,
            noise: 0.05,
            attr_block_size: 5,
        }
    }
}
