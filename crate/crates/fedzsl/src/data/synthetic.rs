//! Synthetic zero-shot dataset generation.
//!
//! Stand-in for image benchmarks: attributes are drawn with block-correlated
//! structure (classes inside a block share a base vector plus a perturbation,
//! so class similarities are non-trivial), a hidden linear map turns
//! attributes into rectified visual features, and per-sample Gaussian noise
//! controls difficulty.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{AttributeTable, ClassId, SampleSet, SplitSpec, SyntheticSpec};
use crate::error::Result;
use crate::linalg::Cholesky;
use crate::rng::{stream, tags};

/// A generated dataset plus the hidden map that produced it.
///
/// `hidden_map` is ground truth the model never sees; it is exposed so the
/// adversary module can synthesize attribute-correlated malicious features.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub attributes: AttributeTable,
    pub split: SplitSpec,
    pub train: SampleSet,
    pub test_seen: SampleSet,
    pub test_unseen: SampleSet,
    pub hidden_map: Array2<f64>,
}

/// Generate a synthetic dataset. Identical `(spec, seed)` produce
/// bit-identical output.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticDataset> {
    spec.validate()?;

    // Attributes: block base + per-class perturbation.
    let mut attr_rng = stream(seed, tags::SYN_ATTRIBUTES, &[]);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let n_blocks = spec.n_classes.div_ceil(spec.attr_block_size);
    let mut bases = Array2::<f64>::zeros((n_blocks, spec.d_a));
    for mut row in bases.rows_mut() {
        for v in row.iter_mut() {
            *v = std_normal.sample(&mut attr_rng);
        }
    }
    let mut rows = Array2::<f64>::zeros((spec.n_classes, spec.d_a));
    for j in 0..spec.n_classes {
        let block = j / spec.attr_block_size;
        for c in 0..spec.d_a {
            rows[(j, c)] = bases[(block, c)] + 0.5 * std_normal.sample(&mut attr_rng);
        }
    }
    let attributes = AttributeTable::new(rows)?;

    // Seen/unseen split by seeded shuffle.
    let mut split_rng = stream(seed, tags::SYN_SPLIT, &[]);
    let mut perm: Vec<ClassId> = (0..spec.n_classes).collect();
    perm.shuffle(&mut split_rng);
    let seen: Vec<ClassId> = perm[..spec.n_seen].to_vec();
    let unseen: Vec<ClassId> = perm[spec.n_seen..].to_vec();
    let split = SplitSpec::new(seen, unseen, &attributes)?;

    // Hidden map, scaled so pre-rectification features are O(1).
    let mut map_rng = stream(seed, tags::SYN_MAP, &[]);
    let scale = 1.0 / (spec.d_a as f64).sqrt();
    let mut hidden_map = Array2::<f64>::zeros((spec.d_v, spec.d_a));
    for v in hidden_map.iter_mut() {
        *v = scale * std_normal.sample(&mut map_rng);
    }

    let mut next_id: u64 = 0;
    let train = make_set(spec, &attributes, &hidden_map, split.seen(), spec.train_per_class, 0, seed, &mut next_id)?;
    let test_seen = make_set(spec, &attributes, &hidden_map, split.seen(), spec.test_per_class, 1, seed, &mut next_id)?;
    let test_unseen = make_set(spec, &attributes, &hidden_map, split.unseen(), spec.test_per_class, 2, seed, &mut next_id)?;

    Ok(SyntheticDataset {
        attributes,
        split,
        train,
        test_seen,
        test_unseen,
        hidden_map,
    })
}

#[allow(clippy::too_many_arguments)]
fn make_set(
    spec: &SyntheticSpec,
    table: &AttributeTable,
    hidden_map: &Array2<f64>,
    classes: &[ClassId],
    per_class: usize,
    kind: u64,
    seed: u64,
    next_id: &mut u64,
) -> Result<SampleSet> {
    let n = classes.len() * per_class;
    let mut ids = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut features = Array2::<f64>::zeros((n, spec.d_v));
    let mut row_ix = 0;
    for &class in classes {
        let clean: Array1<f64> = hidden_map.dot(&table.row(class));
        let mut rng = stream(seed, tags::SYN_SAMPLES, &[class as u64, kind]);
        for _ in 0..per_class {
            for (c, v) in features.row_mut(row_ix).iter_mut().enumerate() {
                let noise = if spec.noise > 0.0 {
                    spec.noise * rng.sample::<f64, _>(rand_distr::StandardNormal)
                } else {
                    0.0
                };
                *v = (clean[c] + noise).max(0.0);
            }
            ids.push(*next_id);
            labels.push(class);
            *next_id += 1;
            row_ix += 1;
        }
    }
    SampleSet::new(ids, labels, features)
}

/// Least-squares estimate of a `d_v × d_a` map from features and class
/// attributes: `H = (VᵀA)(AᵀA + ridge·I)⁻¹`.
///
/// Used when malicious feature synthesis must run on a loaded dataset that
/// has no generator map.
pub fn estimate_hidden_map(train: &SampleSet, table: &AttributeTable, ridge: f64) -> Result<Array2<f64>> {
    let n = train.len();
    let d_a = table.d_a();
    let d_v = train.d_in();
    let mut a = Array2::<f64>::zeros((n, d_a));
    for i in 0..n {
        a.row_mut(i).assign(&table.row(train.class(i)));
    }
    let mut gram = a.t().dot(&a);
    for j in 0..d_a {
        gram[(j, j)] += ridge;
    }
    let chol = Cholesky::new(gram.view())?;
    let vta = train.features().t().dot(&a); // d_v × d_a
    let mut h = Array2::<f64>::zeros((d_v, d_a));
    for r in 0..d_v {
        let sol = chol.solve(vta.row(r));
        h.row_mut(r).assign(&sol);
    }
    Ok(h)
}
