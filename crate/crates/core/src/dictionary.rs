//! Dictionary formation: uniform column sampling, K-means and greedy K-centers.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coding::{Dictionary, DictionarySource};
use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// `c` distinct indices from `0..n`, uniform without replacement, sorted.
pub fn sample_indices(n: usize, c: usize, seed: u64) -> Result<Vec<usize>> {
    if c == 0 || c > n {
        return Err(Error::arg(format!("cannot sample {c} of {n} columns")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, c).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    /// Raw centroids, one per column.
    pub centroids: DMatrix<f64>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to assigned centroids after the last assignment.
    pub objective: f64,
    pub iterations: usize,
    /// Objective after every assignment step.
    pub history: Vec<f64>,
}

impl KMeansFit {
    /// Unit-normalized centroids as a codebook.
    pub fn dictionary(&self) -> Dictionary {
        Dictionary::new(self.centroids.clone(), DictionarySource::KMeans)
            .expect("centroids are finite and non-empty")
            .normalized()
    }
}

/// Nearest centroid with ties going to the lowest index.
fn nearest(x: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.chunks_exact(dim).enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn kmeans_plus_plus(x: &DataMatrix, c: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = x.len();
    let dim = x.dim();
    let mut centroids = Vec::with_capacity(c * dim);
    centroids.extend_from_slice(x.sample(rng.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.sample(i), &centroids[..dim])).collect();
    while centroids.len() < c * dim {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // Rounding can walk past the end; fall back to the heaviest point.
            if d2[chosen] == 0.0 {
                chosen = argmax(&d2);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let start = centroids.len();
        centroids.extend_from_slice(x.sample(pick));
        for (i, w) in d2.iter_mut().enumerate() {
            *w = w.min(sq_dist(x.sample(i), &centroids[start..start + dim]));
        }
    }
    centroids
}

/// Index of the largest value; lowest index on ties.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Stops after `max_iters` assignment steps or once assignments stop
/// changing. A centroid left without points is moved onto the point farthest
/// from its own centroid, so exactly `c` centroids always come back.
pub fn kmeans(x: &DataMatrix, c: usize, max_iters: usize, seed: u64) -> Result<KMeansFit> {
    let n = x.len();
    let dim = x.dim();
    if c == 0 || c > n {
        return Err(Error::arg(format!("cannot form {c} clusters from {n} points")));
    }
    if max_iters == 0 {
        return Err(Error::arg("k-means needs max_iters >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(x, c, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        iterations += 1;
        let mut changed = false;
        for i in 0..n {
            let (j, d) = nearest(x.sample(i), &centroids, dim);
            if assignments[i] != j {
                assignments[i] = j;
                changed = true;
            }
            dist[i] = d;
        }

        let mut counts = vec![0usize; c];
        for &a in &assignments {
            counts[a] += 1;
        }
        for j in 0..c {
            if counts[j] > 0 {
                continue;
            }
            let mut far = usize::MAX;
            for i in 0..n {
                if counts[assignments[i]] > 1 && (far == usize::MAX || dist[i] > dist[far]) {
                    far = i;
                }
            }
            counts[assignments[far]] -= 1;
            counts[j] = 1;
            assignments[far] = j;
            dist[far] = 0.0;
            centroids[j * dim..(j + 1) * dim].copy_from_slice(x.sample(far));
            changed = true;
        }
        history.push(dist.iter().sum());

        if !changed || iterations >= max_iters {
            break;
        }

        centroids.iter_mut().for_each(|v| *v = 0.0);
        for (i, &a) in assignments.iter().enumerate() {
            for (acc, v) in centroids[a * dim..(a + 1) * dim].iter_mut().zip(x.sample(i)) {
                *acc += v;
            }
        }
        for (j, &count) in counts.iter().enumerate() {
            let inv = 1.0 / count as f64;
            centroids[j * dim..(j + 1) * dim].iter_mut().for_each(|v| *v *= inv);
        }
    }

    Ok(KMeansFit {
        centroids: DMatrix::from_vec(dim, c, centroids),
        assignments,
        objective: *history.last().expect("at least one iteration"),
        iterations,
        history,
    })
}

fn check_rows(f: &DMatrix<f64>, c: usize) -> Result<()> {
    if c == 0 || c > f.nrows() {
        return Err(Error::arg(format!("cannot pick {c} centers from {} rows", f.nrows())));
    }
    Ok(())
}

/// Greedy farthest-first traversal over the rows of `f` with a seeded,
/// uniformly chosen first center. Returns row indices in selection order.
pub fn kcenters(f: &DMatrix<f64>, c: usize, seed: u64) -> Result<Vec<usize>> {
    check_rows(f, c)?;
    let first = ChaCha8Rng::seed_from_u64(seed).random_range(0..f.nrows());
    kcenters_from(f, c, first)
}

/// [`kcenters`] with an explicit first center. Ties go to the lowest row index.
pub fn kcenters_from(f: &DMatrix<f64>, c: usize, first: usize) -> Result<Vec<usize>> {
    check_rows(f, c)?;
    if first >= f.nrows() {
        return Err(Error::arg(format!("first center {first} out of range")));
    }
    let rows: Vec<Vec<f64>> = f.row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut nearest = vec![f64::INFINITY; rows.len()];
    let mut chosen = Vec::with_capacity(c);
    let mut next = first;
    loop {
        chosen.push(next);
        for (i, r) in rows.iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(r, &rows[next]));
        }
        if chosen.len() == c {
            break;
        }
        // Already-chosen rows sit at distance 0; skip them so ties among
        // zero-distance rows still yield distinct picks.
        let mut best: Option<usize> = None;
        for i in 0..rows.len() {
            if chosen.contains(&i) {
                continue;
            }
            if best.is_none_or(|b| nearest[i] > nearest[b]) {
                best = Some(i);
            }
        }
        next = best.expect("c <= rows leaves a candidate");
    }
    Ok(chosen)
}

/// `max_i min_{s ∈ centers} ‖f_i − f_s‖`.
pub fn covering_radius(f: &DMatrix<f64>, centers: &[usize]) -> f64 {
    f.row_iter()
        .map(|r| {
            centers
                .iter()
                .map(|&s| (r - f.row(s)).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_manifold;

    #[test]
    fn exhaustive_sample() {
        assert_eq!(sample_indices(5, 5, 123).unwrap(), vec![0, 1, 2, 3, 4]);
        let one = sample_indices(5, 1, 0).unwrap();
        assert!(one.len() == 1 && one[0] < 5);
        assert!(matches!(sample_indices(5, 6, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn sample_is_seeded() {
        let a = sample_indices(1000, 100, 42).unwrap();
        assert_eq!(a, sample_indices(1000, 100, 42).unwrap());
        assert_ne!(a, sample_indices(1000, 100, 43).unwrap());
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sample_marginals_are_uniform() {
        let mut counts = [0usize; 10];
        for seed in 0..10_000 {
            counts[sample_indices(10, 1, seed).unwrap()[0]] += 1;
        }
        // Binomial(10000, 0.1): sigma = 30.
        for c in counts {
            assert!((c as f64 - 1000.0).abs() <= 5.0 * 30.0, "{counts:?}");
        }
    }

    #[test]
    fn kmeans_on_distinct_points() {
        let x = DataMatrix::new(DMatrix::from_column_slice(2, 4, &[0., 0., 1., 0., 0., 5., 3., 3.])).unwrap();
        let fit = kmeans(&x, 4, 10, 1).unwrap();
        assert_eq!(fit.objective, 0.0);
        let mut cols: Vec<Vec<f64>> = fit.centroids.column_iter().map(|c| c.iter().copied().collect()).collect();
        cols.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut pts: Vec<Vec<f64>> = (0..4).map(|i| x.sample(i).to_vec()).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(cols, pts);
    }

    #[test]
    fn kmeans_finds_separated_cluster_means() {
        let base = synth_manifold(3, 3, 20, 0.0, 4).unwrap().into_matrix() * 0.5;
        let mut m = base.clone();
        for i in 10..20 {
            m[(0, i)] += 100.0;
        }
        let x = DataMatrix::new(m.clone()).unwrap();
        let mean_a = m.columns(0, 10).column_mean();
        let mean_b = m.columns(10, 10).column_mean();
        for seed in 0..5 {
            let fit = kmeans(&x, 2, 50, seed).unwrap();
            for mean in [&mean_a, &mean_b] {
                let best = fit
                    .centroids
                    .column_iter()
                    .map(|c| (c - mean).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(best < 1e-9, "seed {seed}: {best}");
            }
        }
    }

    #[test]
    fn kmeans_objective_never_increases() {
        for seed in 0..5 {
            let x = synth_manifold(5, 3, 200, 0.2, seed).unwrap();
            let fit = kmeans(&x, 12, 100, seed).unwrap();
            assert!(fit.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{:?}", fit.history);
            assert_eq!(fit.objective, *fit.history.last().unwrap());
        }
    }

    #[test]
    fn kmeans_keeps_all_centroids_with_duplicates() {
        // Only two distinct points but three clusters requested.
        let x = DataMatrix::new(DMatrix::from_column_slice(1, 6, &[0., 0., 0., 1., 1., 1.])).unwrap();
        let fit = kmeans(&x, 3, 20, 0).unwrap();
        assert_eq!(fit.centroids.ncols(), 3);
        assert!(fit.centroids.iter().all(|v| v.is_finite()));
        assert_eq!(fit.objective, 0.0);
    }

    #[test]
    fn kmeans_rejects_bad_arguments() {
        let x = synth_manifold(2, 1, 3, 0.0, 0).unwrap();
        assert!(kmeans(&x, 4, 10, 0).is_err());
        assert!(kmeans(&x, 2, 0, 0).is_err());
    }

    #[test]
    fn kmeans_dictionary_has_unit_atoms() {
        let x = synth_manifold(4, 2, 30, 0.1, 1).unwrap();
        let d = kmeans(&x, 5, 20, 1).unwrap().dictionary();
        assert_eq!(d.source(), &DictionarySource::KMeans);
        for col in d.atoms().column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
    }

    fn line(points: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(points.len(), 1, points)
    }

    #[test]
    fn kcenters_on_a_line() {
        assert_eq!(kcenters_from(&line(&[0.0, 1.0, 10.0]), 2, 0).unwrap(), vec![0, 2]);
        // Every greedy trace: from 1 the farthest is 10, from 10 it is 0.
        assert_eq!(kcenters_from(&line(&[0.0, 1.0, 10.0]), 2, 1).unwrap(), vec![1, 2]);
        assert_eq!(kcenters_from(&line(&[0.0, 1.0, 10.0]), 2, 2).unwrap(), vec![2, 0]);
    }

    #[test]
    fn kcenters_full_selection_covers_everything() {
        let f = synth_manifold(3, 2, 7, 0.1, 2).unwrap().into_matrix().transpose();
        let mut all = kcenters(&f, 7, 5).unwrap();
        assert_eq!(covering_radius(&f, &all), 0.0);
        all.sort();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
        assert!(kcenters(&f, 8, 0).is_err());
    }

    #[test]
    fn kcenters_skips_duplicates() {
        // Rows 0 and 2 identical; for every first pick the second pick is not
        // the twin of the first.
        let f = DMatrix::from_row_slice(4, 2, &[1., 1., 0., 3., 1., 1., 4., 0.]);
        for first in 0..4 {
            let picks = kcenters_from(&f, 2, first).unwrap();
            assert_ne!(f.row(picks[0]), f.row(picks[1]), "first {first}");
        }
        let same = DMatrix::from_element(3, 2, 1.0);
        let picks = kcenters_from(&same, 3, 1).unwrap();
        assert_eq!(picks, vec![1, 0, 2]);
    }

    #[test]
    fn kcenters_radius_shrinks() {
        let f = synth_manifold(4, 4, 40, 0.0, 8).unwrap().into_matrix().transpose();
        let full = kcenters(&f, 40, 3).unwrap();
        let mut prev = f64::INFINITY;
        for c in 1..=40 {
            let r = covering_radius(&f, &full[..c]);
            assert!(r <= prev);
            assert_eq!(kcenters(&f, c, 3).unwrap(), full[..c]);
            prev = r;
        }
    }
}
