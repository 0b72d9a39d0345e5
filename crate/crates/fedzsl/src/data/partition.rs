//! Client partitioning schemes.
//!
//! All partitioners are pure functions of their inputs and a seed: repeated
//! calls are bit-identical, sample counts are conserved, and the p.c.c.d.
//! modes keep class sets pairwise disjoint.

use rand::seq::SliceRandom;
use rand_distr::{Dirichlet, Distribution};
use std::collections::BTreeMap;

use super::{ClassId, ClientShare, PartitionMode, PartitionParams, PartitionPlan, SampleSet};
use crate::error::{Error, Result};
use crate::rng::{stream, tags};

/// Split the seen classes into `k` pairwise-disjoint near-equal sets, each
/// client receiving every sample of its classes. When `k` does not divide
/// the class count, the lowest-index clients receive one extra class.
pub fn partition_pccd(train: &SampleSet, seen: &[ClassId], k: usize, seed: u64) -> Result<PartitionPlan> {
    if k == 0 {
        return Err(Error::InvalidArgument("client count must be ≥ 1".into()));
    }
    if k > seen.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} seen classes across {} clients",
            seen.len(),
            k
        )));
    }
    let mut shuffled = seen.to_vec();
    shuffled.shuffle(&mut stream(seed, tags::PART_CLASSES, &[]));
    let base = seen.len() / k;
    let extra = seen.len() % k;
    let mut shares = Vec::with_capacity(k);
    let mut cursor = 0;
    for client in 0..k {
        let take = base + usize::from(client < extra);
        let mut classes: Vec<ClassId> = shuffled[cursor..cursor + take].to_vec();
        cursor += take;
        classes.sort_unstable();
        shares.push(ClientShare { classes, sample_indices: Vec::new() });
    }
    assign_full_classes(train, &mut shares);
    let phi = implied_phi(&shares, seen.len());
    Ok(PartitionPlan::new(
        PartitionMode::Pccd,
        PartitionParams { phi, ..Default::default() },
        shares,
    ))
}

/// Disjoint class sets with Dirichlet-sized shares: class-count proportions
/// are drawn from `Dir(alpha)`, rounded by largest remainder, and any client
/// below `min_classes` is topped up by moving classes from the currently
/// largest client.
pub fn partition_pccd_imbalanced(
    train: &SampleSet,
    seen: &[ClassId],
    k: usize,
    alpha: f64,
    min_classes: usize,
    seed: u64,
) -> Result<PartitionPlan> {
    if k == 0 {
        return Err(Error::InvalidArgument("client count must be ≥ 1".into()));
    }
    if k * min_classes > seen.len() {
        return Err(Error::InvalidArgument(format!(
            "min_classes {} infeasible: {} clients need more than {} seen classes",
            min_classes,
            k,
            seen.len()
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument("alpha must be > 0".into()));
    }
    let proportions = sample_dirichlet(alpha, k, &mut stream(seed, tags::PART_DIRICHLET, &[]));
    let mut counts = largest_remainder(&proportions, seen.len());
    // top-up repair: move one class at a time from the largest share
    loop {
        let (min_ix, &min_count) = counts
            .iter()
            .enumerate()
            .min_by_key(|(i, &c)| (c, *i))
            .expect("k ≥ 1");
        if min_count >= min_classes {
            break;
        }
        let (max_ix, _) = counts
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| (a, std::cmp::Reverse(i)).cmp(&(b, std::cmp::Reverse(j))))
            .expect("k ≥ 1");
        counts[max_ix] -= 1;
        counts[min_ix] += 1;
    }
    let mut shuffled = seen.to_vec();
    shuffled.shuffle(&mut stream(seed, tags::PART_CLASSES, &[]));
    let mut shares = Vec::with_capacity(k);
    let mut cursor = 0;
    for &take in &counts {
        let mut classes: Vec<ClassId> = shuffled[cursor..cursor + take].to_vec();
        cursor += take;
        classes.sort_unstable();
        shares.push(ClientShare { classes, sample_indices: Vec::new() });
    }
    assign_full_classes(train, &mut shares);
    let phi = implied_phi(&shares, seen.len());
    Ok(PartitionPlan::new(
        PartitionMode::PccdImbalanced,
        PartitionParams { alpha: Some(alpha), phi, ..Default::default() },
        shares,
    ))
}

/// Per-class round-robin sample assignment: every client sees every class
/// that has at least `k` samples.
pub fn partition_iid(train: &SampleSet, k: usize, seed: u64) -> Result<PartitionPlan> {
    if k == 0 {
        return Err(Error::InvalidArgument("client count must be ≥ 1".into()));
    }
    if train.is_empty() {
        return Err(Error::Empty("train set".into()));
    }
    let mut shares = vec![ClientShare { classes: Vec::new(), sample_indices: Vec::new() }; k];
    for (class, indices) in indices_by_class(train) {
        let mut shuffled = indices;
        shuffled.shuffle(&mut stream(seed, tags::PART_SAMPLES, &[class as u64]));
        for (j, ix) in shuffled.into_iter().enumerate() {
            shares[j % k].sample_indices.push(ix);
        }
    }
    finalize_classes(train, &mut shares);
    let phi = implied_phi(&shares, train.distinct_classes().len());
    Ok(PartitionPlan::new(
        PartitionMode::Iid,
        PartitionParams { phi, ..Default::default() },
        shares,
    ))
}

/// Per class, sample counts are split across clients by a `Dir(alpha)` draw;
/// zero counts are allowed, so some (class, client) cells may be empty.
pub fn partition_noniid_dirichlet(
    train: &SampleSet,
    k: usize,
    alpha: f64,
    seed: u64,
) -> Result<PartitionPlan> {
    if k == 0 {
        return Err(Error::InvalidArgument("client count must be ≥ 1".into()));
    }
    if train.is_empty() {
        return Err(Error::Empty("train set".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument("alpha must be > 0".into()));
    }
    let mut shares = vec![ClientShare { classes: Vec::new(), sample_indices: Vec::new() }; k];
    for (class, indices) in indices_by_class(train) {
        let proportions = sample_dirichlet(alpha, k, &mut stream(seed, tags::PART_DIRICHLET, &[class as u64]));
        let counts = largest_remainder(&proportions, indices.len());
        let mut shuffled = indices;
        shuffled.shuffle(&mut stream(seed, tags::PART_SAMPLES, &[class as u64]));
        let mut cursor = 0;
        for (client, &take) in counts.iter().enumerate() {
            shares[client]
                .sample_indices
                .extend_from_slice(&shuffled[cursor..cursor + take]);
            cursor += take;
        }
    }
    finalize_classes(train, &mut shares);
    let phi = implied_phi(&shares, train.distinct_classes().len());
    Ok(PartitionPlan::new(
        PartitionMode::NoniidDirichlet,
        PartitionParams { alpha: Some(alpha), phi, ..Default::default() },
        shares,
    ))
}

/// Keep `⌈rho · n⌉` samples per client per class, chosen by seeded shuffle.
/// Class sets are unchanged; the ceiling keeps every non-empty class
/// non-empty.
pub fn subsample_ratio(
    plan: &PartitionPlan,
    train: &SampleSet,
    rho: f64,
    seed: u64,
) -> Result<PartitionPlan> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rho must lie in (0, 1], got {}",
            rho
        )));
    }
    let mut shares = Vec::with_capacity(plan.n_clients());
    for (client, share) in plan.shares().iter().enumerate() {
        let mut by_class: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
        for &ix in &share.sample_indices {
            by_class.entry(train.class(ix)).or_default().push(ix);
        }
        let mut kept = Vec::new();
        for (class, mut indices) in by_class {
            let keep = ((rho * indices.len() as f64).ceil() as usize).min(indices.len());
            indices.shuffle(&mut stream(seed, tags::PART_SUBSAMPLE, &[client as u64, class as u64]));
            indices.truncate(keep);
            kept.extend(indices);
        }
        kept.sort_unstable();
        shares.push(ClientShare { classes: share.classes.clone(), sample_indices: kept });
    }
    let mut params = plan.params;
    params.rho = Some(rho);
    Ok(PartitionPlan::new(plan.mode, params, shares))
}

fn indices_by_class(train: &SampleSet) -> BTreeMap<ClassId, Vec<usize>> {
    let mut map: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
    for i in 0..train.len() {
        map.entry(train.class(i)).or_default().push(i);
    }
    map
}

fn assign_full_classes(train: &SampleSet, shares: &mut [ClientShare]) {
    let mut owner: BTreeMap<ClassId, usize> = BTreeMap::new();
    for (client, share) in shares.iter().enumerate() {
        for &c in &share.classes {
            owner.insert(c, client);
        }
    }
    for i in 0..train.len() {
        if let Some(&client) = owner.get(&train.class(i)) {
            shares[client].sample_indices.push(i);
        }
    }
}

fn finalize_classes(train: &SampleSet, shares: &mut [ClientShare]) {
    for share in shares.iter_mut() {
        share.sample_indices.sort_unstable();
        let mut classes: Vec<ClassId> = share.sample_indices.iter().map(|&i| train.class(i)).collect();
        classes.sort_unstable();
        classes.dedup();
        share.classes = classes;
    }
}

fn implied_phi(shares: &[ClientShare], n_classes: usize) -> Option<f64> {
    if n_classes == 0 {
        return None;
    }
    let max = shares.iter().map(|s| s.classes.len()).max().unwrap_or(0);
    Some(max as f64 / n_classes as f64)
}

fn sample_dirichlet(alpha: f64, k: usize, rng: &mut impl rand::Rng) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    let dir = Dirichlet::new_with_size(alpha, k).expect("checked alpha > 0, k ≥ 2");
    dir.sample(rng)
}

/// Largest-remainder rounding of `proportions · total` to non-negative
/// integers summing to `total`. Ties go to the lower index.
fn largest_remainder(proportions: &[f64], total: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = Vec::with_capacity(proportions.len());
    let mut fractions: Vec<(f64, usize)> = Vec::with_capacity(proportions.len());
    let mut assigned = 0usize;
    for (i, &p) in proportions.iter().enumerate() {
        let exact = p * total as f64;
        let floor = exact.floor().min(total as f64) as usize;
        counts.push(floor);
        assigned += floor;
        fractions.push((exact - floor as f64, i));
    }
    let mut rem = total.saturating_sub(assigned);
    fractions.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for &(_, ix) in fractions.iter() {
        if rem == 0 {
            break;
        }
        counts[ix] += 1;
        rem -= 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticSpec};

    fn dataset(n_classes: usize, n_seen: usize, per_class: usize) -> crate::data::SyntheticDataset {
        let spec = SyntheticSpec {
            n_classes,
            n_seen,
            d_a: 4,
            d_v: 6,
            train_per_class: per_class,
            test_per_class: 2,
            noise: 0.01,
            attr_block_size: 5,
        };
        generate_synthetic(&spec, 42).unwrap()
    }

    #[test]
    fn pccd_even_split_150_classes_10_clients() {
        let data = dataset(160, 150, 2);
        let plan = partition_pccd(&data.train, data.split.seen(), 10, 1).unwrap();
        let mut union = Vec::new();
        for share in plan.shares() {
            assert_eq!(share.classes.len(), 15);
            union.extend_from_slice(&share.classes);
        }
        union.sort_unstable();
        assert_eq!(union, data.split.seen());
        assert_eq!(plan.total_samples(), data.train.len());
    }

    #[test]
    fn pccd_remainder_goes_to_lowest_clients() {
        let data = dataset(12, 10, 3);
        let plan = partition_pccd(&data.train, data.split.seen(), 3, 9).unwrap();
        let sizes: Vec<usize> = plan.shares().iter().map(|s| s.classes.len()).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
    }

    #[test]
    fn pccd_single_client_owns_everything() {
        let data = dataset(12, 10, 3);
        let plan = partition_pccd(&data.train, data.split.seen(), 1, 0).unwrap();
        assert_eq!(plan.share(0).classes, data.split.seen());
        assert_eq!(plan.share(0).sample_indices.len(), data.train.len());
    }

    #[test]
    fn pccd_rejects_more_clients_than_classes() {
        let data = dataset(12, 10, 3);
        assert!(partition_pccd(&data.train, data.split.seen(), 11, 0).is_err());
    }

    #[test]
    fn imbalanced_respects_min_classes() {
        let data = dataset(22, 20, 3);
        for seed in 0..20 {
            let plan =
                partition_pccd_imbalanced(&data.train, data.split.seen(), 5, 0.5, 2, seed).unwrap();
            for share in plan.shares() {
                assert!(share.classes.len() >= 2, "seed {}: {:?}", seed, share.classes.len());
            }
            let total: usize = plan.shares().iter().map(|s| s.classes.len()).sum();
            assert_eq!(total, 20);
        }
    }

    #[test]
    fn imbalanced_forced_by_constraint() {
        let data = dataset(6, 4, 3);
        for seed in 0..10 {
            let plan =
                partition_pccd_imbalanced(&data.train, data.split.seen(), 2, 0.5, 2, seed).unwrap();
            assert_eq!(plan.share(0).classes.len(), 2);
            assert_eq!(plan.share(1).classes.len(), 2);
        }
    }

    #[test]
    fn imbalanced_high_alpha_is_near_uniform() {
        let data = dataset(160, 150, 1);
        for seed in 0..20 {
            let plan =
                partition_pccd_imbalanced(&data.train, data.split.seen(), 10, 1e6, 2, seed).unwrap();
            let sizes: Vec<usize> = plan.shares().iter().map(|s| s.classes.len()).collect();
            let max = *sizes.iter().max().unwrap();
            let min = *sizes.iter().min().unwrap();
            assert!(
                max as f64 / min as f64 <= 2.0,
                "seed {}: sizes {:?}",
                seed,
                sizes
            );
        }
    }

    #[test]
    fn iid_each_client_sees_every_class() {
        let data = dataset(12, 10, 100);
        let plan = partition_iid(&data.train, 10, 4).unwrap();
        for share in plan.shares() {
            assert_eq!(share.classes.len(), 10);
            assert_eq!(share.sample_indices.len(), 100);
            // 10 samples of each class
            let mut counts: BTreeMap<ClassId, usize> = BTreeMap::new();
            for &ix in &share.sample_indices {
                *counts.entry(data.train.class(ix)).or_default() += 1;
            }
            assert!(counts.values().all(|&c| c == 10));
        }
        assert_eq!(plan.total_samples(), data.train.len());
    }

    #[test]
    fn noniid_has_empty_cells_and_conserves_samples() {
        let data = dataset(22, 20, 30);
        let plan = partition_noniid_dirichlet(&data.train, 10, 0.5, 0).unwrap();
        assert_eq!(plan.total_samples(), data.train.len());
        let mut empty_cells = 0;
        for share in plan.shares() {
            let mut counts: BTreeMap<ClassId, usize> = BTreeMap::new();
            for &ix in &share.sample_indices {
                *counts.entry(data.train.class(ix)).or_default() += 1;
            }
            for &class in data.split.seen() {
                if counts.get(&class).copied().unwrap_or(0) == 0 {
                    empty_cells += 1;
                }
            }
        }
        assert!(empty_cells > 0, "expected at least one empty (class, client) cell");
    }

    #[test]
    fn single_client_gets_all_samples_in_both_modes() {
        let data = dataset(12, 10, 10);
        let iid = partition_iid(&data.train, 1, 0).unwrap();
        assert_eq!(iid.share(0).sample_indices.len(), data.train.len());
        let noniid = partition_noniid_dirichlet(&data.train, 1, 0.5, 0).unwrap();
        assert_eq!(noniid.share(0).sample_indices.len(), data.train.len());
    }

    #[test]
    fn subsample_keeps_ceil_rho_n() {
        let data = dataset(12, 10, 60);
        let plan = partition_pccd(&data.train, data.split.seen(), 5, 3).unwrap();
        let sub = subsample_ratio(&plan, &data.train, 0.1, 7).unwrap();
        for (share, orig) in sub.shares().iter().zip(plan.shares()) {
            assert_eq!(share.classes, orig.classes);
            // 60 per class → 6 kept per class
            assert_eq!(share.sample_indices.len(), share.classes.len() * 6);
        }
    }

    #[test]
    fn subsample_full_ratio_is_identity() {
        let data = dataset(12, 10, 10);
        let plan = partition_pccd(&data.train, data.split.seen(), 3, 3).unwrap();
        let sub = subsample_ratio(&plan, &data.train, 1.0, 9).unwrap();
        for (a, b) in sub.shares().iter().zip(plan.shares()) {
            assert_eq!(a.sample_indices, b.sample_indices);
        }
    }

    #[test]
    fn subsample_ceiling_keeps_class_nonempty() {
        let data = dataset(12, 10, 10);
        let plan = partition_pccd(&data.train, data.split.seen(), 2, 1).unwrap();
        let sub = subsample_ratio(&plan, &data.train, 0.01, 2).unwrap();
        for share in sub.shares() {
            // one sample kept per class
            assert_eq!(share.sample_indices.len(), share.classes.len());
        }
        assert!(subsample_ratio(&plan, &data.train, 0.0, 2).is_err());
        assert!(subsample_ratio(&plan, &data.train, 1.5, 2).is_err());
    }

    #[test]
    fn partitions_are_deterministic() {
        let data = dataset(22, 20, 8);
        let a = partition_pccd(&data.train, data.split.seen(), 4, 5).unwrap();
        let b = partition_pccd(&data.train, data.split.seen(), 4, 5).unwrap();
        assert_eq!(a, b);
        let c = partition_noniid_dirichlet(&data.train, 4, 0.5, 5).unwrap();
        let d = partition_noniid_dirichlet(&data.train, 4, 0.5, 5).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn largest_remainder_sums_and_breaks_ties_low() {
        assert_eq!(largest_remainder(&[0.5, 0.5], 5), vec![3, 2]);
        assert_eq!(largest_remainder(&[0.2, 0.3, 0.5], 10), vec![2, 3, 5]);
        let counts = largest_remainder(&[1.0 / 3.0; 3], 10);
        assert_eq!(counts.iter().sum::<usize>(), 10);
        assert_eq!(counts, vec![4, 3, 3]);
    }
}
