use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::PointSample;
use crate::config::{WeightSpec, WindowSpec};

/// Homogeneous Poisson process of the given intensity on `window`, with iid
/// weights independent of the locations.
pub fn sample_poisson_with<R: Rng + ?Sized>(
    window: &WindowSpec,
    intensity: f64,
    weights: &WeightSpec,
    rng: &mut R,
) -> PointSample {
    let mean = intensity * window.volume();
    let n = if mean > 0.0 {
        Poisson::new(mean).expect("finite mean").sample(rng) as usize
    } else {
        0
    };
    let locations: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            window
                .sides
                .iter()
                .map(|&l| rng.random::<f64>() * l)
                .collect()
        })
        .collect();
    PointSample::from_locations(locations, weights, "poisson".into(), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Boundary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn count_mean_and_variance() {
        let w = WindowSpec::new(vec![1.0, 1.0], Boundary::Torus);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let counts: Vec<f64> = (0..n)
            .map(|_| {
                sample_poisson_with(&w, 100.0, &WeightSpec::ConstantOne, &mut rng).len() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 100.0).abs() < 3.0 * (100.0 / n as f64).sqrt());
        // SE of the sample variance for Poisson(λ): sqrt((2λ² + λ)/n)
        assert!((var - 100.0).abs() < 5.0 * ((2.0 * 1e4 + 100.0) / n as f64).sqrt());
    }

    #[test]
    fn locations_inside_window_and_weights_constant() {
        let w = WindowSpec::new(vec![2.0, 0.5, 1.0], Boundary::Hard);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = sample_poisson_with(&w, 50.0, &WeightSpec::ConstantOne, &mut rng);
        for (i, p) in s.points.iter().enumerate() {
            assert_eq!(p.id, i as u64);
            assert_eq!(p.weight, 1.0);
            for (x, l) in p.location.iter().zip(&w.sides) {
                assert!(*x >= 0.0 && x < l);
            }
        }
    }
}
