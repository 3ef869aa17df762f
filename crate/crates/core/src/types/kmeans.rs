use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{sq_distance, Scalar};
use crate::seeds::{rng_for, SeedRole};

pub const MAX_ITERATIONS: usize = 100;

/// Result of the best k-means restart.
#[derive(Clone, Debug, PartialEq)]
pub struct KMeansFit<S> {
    /// Cluster of each input vector.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<S>>,
    /// Within-cluster sum of squares of the final assignment.
    pub inertia: S,
    /// Inertia after every assignment step of the winning run.
    pub inertia_trace: Vec<S>,
    pub iterations: usize,
}

fn nearest<S: Scalar>(v: &[S], centroids: &[Vec<S>]) -> (usize, S) {
    let mut best = (0, sq_distance(v, &centroids[0]));
    for (k, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_distance(v, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// First centre uniformly at random, then repeatedly the point farthest from
/// its nearest chosen centre (lowest index on ties).
fn farthest_point_init<S: Scalar, R: Rng>(vectors: &[Vec<S>], m: usize, rng: &mut R) -> Vec<Vec<S>> {
    let mut centroids = vec![vectors[rng.gen_range(0..vectors.len())].clone()];
    let mut dist: Vec<S> = vectors.iter().map(|v| sq_distance(v, &centroids[0])).collect();
    while centroids.len() < m {
        let mut far = 0;
        for (i, &d) in dist.iter().enumerate() {
            if d > dist[far] {
                far = i;
            }
        }
        let c = vectors[far].clone();
        for (d, v) in dist.iter_mut().zip(vectors) {
            *d = d.min(sq_distance(v, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd<S: Scalar>(vectors: &[Vec<S>], mut centroids: Vec<Vec<S>>) -> KMeansFit<S> {
    let dim = vectors[0].len();
    let mut labels = vec![usize::MAX; vectors.len()];
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let mut changed = false;
        let mut inertia = S::zero();
        for (label, v) in labels.iter_mut().zip(vectors) {
            let (k, d) = nearest(v, &centroids);
            inertia += d;
            if *label != k {
                *label = k;
                changed = true;
            }
        }
        trace.push(inertia);
        iterations += 1;
        if !changed || iterations >= MAX_ITERATIONS {
            break;
        }
        // empty clusters keep their previous centre
        let mut sums = vec![vec![S::zero(); dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (&k, v) in labels.iter().zip(vectors) {
            counts[k] += 1;
            for (s, &x) in sums[k].iter_mut().zip(v) {
                *s += x;
            }
        }
        for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if n > 0 {
                let n = S::from_count(n);
                *c = s.into_iter().map(|x| x / n).collect();
            }
        }
    }
    KMeansFit {
        inertia: *trace.last().expect("at least one assignment step"),
        labels,
        centroids,
        inertia_trace: trace,
        iterations,
    }
}

/// Lloyd's algorithm with farthest-point seeding; the restart with the lowest
/// inertia wins (earliest on ties). More clusters than distinct points is
/// allowed and yields duplicate centres.
pub fn kmeans<S: Scalar>(vectors: &[Vec<S>], m: usize, seed: u64, restarts: usize) -> Result<KMeansFit<S>> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("k-means input"));
    }
    if m == 0 {
        return Err(Error::InvalidConfig("k-means needs at least one cluster".into()));
    }
    let dim = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            what: "k-means vector",
            expected: dim,
            got: v.len(),
        });
    }
    let mut best: Option<KMeansFit<S>> = None;
    for run in 0..restarts.max(1) {
        let mut rng = rng_for(seed, SeedRole::Clustering, run as u64);
        let fit = lloyd(vectors, farthest_point_init(vectors, m, &mut rng));
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn single_cluster_is_the_mean() {
        let v: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        let fit = kmeans(&v, 1, 0, 3).unwrap();
        assert_eq!(fit.labels, vec![0, 0, 0]);
        assert!((fit.centroids[0][0] - 0.5).abs() < 1e-12);
        // ‖(.5,-.5)‖² twice
        assert!((fit.inertia - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_vectors_share_a_cluster() {
        let v = vec![vec![0.25f64, 0.75]; 6];
        let fit = kmeans(&v, 2, 9, 2).unwrap();
        assert!(fit.labels.iter().all(|&l| l == fit.labels[0]));
        assert_eq!(fit.inertia, 0.0);
        assert_eq!(fit.centroids.len(), 2);
    }

    #[test]
    fn separates_two_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v = Vec::new();
        for i in 0..40 {
            let p: f64 = rng.gen_range(0.75..1.0);
            v.push(if i % 2 == 0 { vec![p, 1.0 - p] } else { vec![1.0 - p, p] });
        }
        let fit = kmeans(&v, 2, 3, 1).unwrap();
        for i in (0..40).step_by(2) {
            assert_eq!(fit.labels[i], fit.labels[0]);
            assert_eq!(fit.labels[i + 1], fit.labels[1]);
        }
        assert_ne!(fit.labels[0], fit.labels[1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(kmeans::<f64>(&[], 2, 0, 1), Err(Error::EmptyInput(_))));
        assert!(kmeans(&[vec![1.0]], 0, 0, 1).is_err());
        assert!(matches!(
            kmeans(&[vec![1.0], vec![1.0, 0.0]], 1, 0, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn cloud(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
                let s: f64 = raw.iter().sum::<f64>().max(1e-9);
                raw.into_iter().map(|x| x / s).collect()
            })
            .collect()
    }

    proptest! {
        #[test]
        fn inertia_never_increases(seed in 0u64..500, n in 1usize..40, m in 1usize..6) {
            let v = cloud(seed, n, 4);
            let fit = kmeans(&v, m, seed, 1).unwrap();
            for w in fit.inertia_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            prop_assert!(fit.iterations <= MAX_ITERATIONS);
            prop_assert!(fit.labels.iter().all(|&l| l < m));
            for c in &fit.centroids {
                prop_assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(c.iter().all(|&x| x >= 0.0));
            }
        }

        #[test]
        fn deterministic(seed in 0u64..200) {
            let v = cloud(seed, 25, 3);
            prop_assert_eq!(kmeans(&v, 3, seed, 2).unwrap(), kmeans(&v, 3, seed, 2).unwrap());
        }

        #[test]
        fn more_restarts_never_hurt(seed in 0u64..200) {
            let v = cloud(seed, 30, 3);
            let one = kmeans(&v, 3, seed, 1).unwrap();
            let many = kmeans(&v, 3, seed, 5).unwrap();
            prop_assert!(many.inertia <= one.inertia);
        }
    }
}
