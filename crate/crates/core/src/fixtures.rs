//! Reference plants and pattern builders used by the CLI, tests and
//! benchmarks, plus seeded random plant generation.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::numerics::spectral_radius;
use crate::pattern::{
    chain_pattern, pure_delay_pattern, uniform_pattern, BlockMask, BlockPartition,
    InformationPattern,
};
use crate::riccati::Plant;
use crate::Matrix;

/// Three-player chain plant: tridiagonal state coupling, full actuation and
/// measurement, unit measurement noise and control weight.
pub fn chain_plant() -> Plant {
    let a = Matrix::from_row_slice(3, 3, &[0.5, 0.2, 0.0, 0.2, 0.5, 0.2, 0.0, 0.2, 0.5]);
    let mut b1 = Matrix::zeros(3, 6);
    b1.view_mut((0, 0), (3, 3)).copy_from(&Matrix::identity(3, 3));
    let b2 = Matrix::identity(3, 3);
    let mut c1 = Matrix::zeros(6, 3);
    c1.view_mut((0, 0), (3, 3)).copy_from(&Matrix::identity(3, 3));
    let c2 = Matrix::identity(3, 3);
    let mut d12 = Matrix::zeros(6, 3);
    d12.view_mut((3, 0), (3, 3)).copy_from(&Matrix::identity(3, 3));
    let mut d21 = Matrix::zeros(3, 6);
    d21.view_mut((0, 3), (3, 3)).copy_from(&Matrix::identity(3, 3));
    Plant::new(a, b1, b2, c1, c2, d12, d21).expect("chain plant is valid")
}

/// Information pattern of the three-player chain (N = 2, neighbours heard
/// after one step).
pub fn chain_information_pattern() -> InformationPattern {
    chain_pattern(
        BlockPartition::new(vec![1, 1, 1]).expect("valid partition"),
        BlockPartition::new(vec![1, 1, 1]).expect("valid partition"),
    )
    .expect("chain pattern is valid")
}

/// Two-player four-state plant used for the delay sweep experiments.
pub fn sweep_plant() -> Plant {
    let a = Matrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.2, 0.0, 0.0, //
            -0.2, 0.8, 0.0, 0.2, //
            0.0, 0.0, 1.0, 0.2, //
            0.0, -0.2, -0.2, 0.8,
        ],
    );
    let b1 = Matrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, 0.0, 0.0, //
            0.2, -0.2, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.2, 0.2, 0.0, 0.0,
        ],
    );
    let b2 = Matrix::from_row_slice(4, 2, &[0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.2]);
    let c1 = Matrix::from_row_slice(
        3,
        4,
        &[10.0, 0.0, -10.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    );
    let c2 = Matrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let d12 = Matrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
    let d21 = Matrix::from_row_slice(2, 4, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    Plant::new(a, b1, b2, c1, c2, d12, d21).expect("sweep plant is valid")
}

/// Sparsity families for the two-player sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFamily {
    /// Lower triangular: player 2 also sees player 1.
    Tri,
    /// Block diagonal.
    Di,
    /// Only the (2,2) block.
    Low,
    /// Nothing shared before the horizon.
    PureDelay,
}

impl SweepFamily {
    pub const ALL: [SweepFamily; 4] =
        [SweepFamily::Tri, SweepFamily::Di, SweepFamily::Low, SweepFamily::PureDelay];

    pub fn name(&self) -> &'static str {
        match self {
            SweepFamily::Tri => "tri",
            SweepFamily::Di => "di",
            SweepFamily::Low => "low",
            SweepFamily::PureDelay => "pure-delay",
        }
    }

    pub fn parse(s: &str) -> Option<SweepFamily> {
        match s {
            "tri" => Some(SweepFamily::Tri),
            "di" => Some(SweepFamily::Di),
            "low" => Some(SweepFamily::Low),
            "pure-delay" => Some(SweepFamily::PureDelay),
            _ => None,
        }
    }

    fn mask(&self) -> BlockMask {
        match self {
            SweepFamily::Tri => vec![vec![true, false], vec![true, true]],
            SweepFamily::Di => vec![vec![true, false], vec![false, true]],
            SweepFamily::Low => vec![vec![false, false], vec![false, true]],
            SweepFamily::PureDelay => vec![vec![false, false], vec![false, false]],
        }
    }
}

/// Two-player pattern holding the family's mask at every lag 1..N.
pub fn sweep_pattern(family: SweepFamily, n: usize) -> InformationPattern {
    let u = BlockPartition::new(vec![1, 1]).expect("valid partition");
    let y = BlockPartition::new(vec![1, 1]).expect("valid partition");
    match family {
        SweepFamily::PureDelay => pure_delay_pattern(u, y, n).expect("valid pattern"),
        _ => uniform_pattern(u, y, n, family.mask()).expect("valid pattern"),
    }
}

/// Dimensions for random plant generation.
#[derive(Debug, Clone, Copy)]
pub struct RandomPlantDims {
    pub n: usize,
    pub m1: usize,
    pub p2: usize,
    pub q1: usize,
    pub q2: usize,
}

impl Default for RandomPlantDims {
    fn default() -> Self {
        // q1 >= p2 and m1 >= q2 keep the feedthrough blocks full rank
        Self { n: 3, m1: 3, p2: 2, q1: 3, q2: 2 }
    }
}

/// Seeded random stable plant with positive definite feedthrough blocks.
///
/// The state matrix is rescaled to a spectral radius in [0.3, 0.8];
/// D12 and D21 are identity-dominated so the definiteness invariants hold.
pub fn random_stable_plant(rng: &mut ChaCha8Rng, dims: RandomPlantDims) -> Plant {
    assert!(dims.q1 >= dims.p2, "need q1 >= p2 for full-rank D12");
    assert!(dims.m1 >= dims.q2, "need m1 >= q2 for full-rank D21");
    let raw = Matrix::from_fn(dims.n, dims.n, |_, _| rng.random_range(-1.0..1.0));
    let radius = spectral_radius(&raw);
    let target = rng.random_range(0.3..0.8);
    let a = if radius > 1e-12 { raw * (target / radius) } else { raw };
    let b1 = Matrix::from_fn(dims.n, dims.m1, |_, _| rng.random_range(-1.0..1.0));
    let b2 = Matrix::from_fn(dims.n, dims.p2, |_, _| rng.random_range(-1.0..1.0));
    let c1 = Matrix::from_fn(dims.q1, dims.n, |_, _| rng.random_range(-1.0..1.0));
    let c2 = Matrix::from_fn(dims.q2, dims.n, |_, _| rng.random_range(-1.0..1.0));
    let mut d12 = Matrix::from_fn(dims.q1, dims.p2, |_, _| 0.3 * rng.random_range(-1.0..1.0));
    for i in 0..dims.p2 {
        d12[(i, i)] += 1.0;
    }
    let mut d21 = Matrix::from_fn(dims.q2, dims.m1, |_, _| 0.3 * rng.random_range(-1.0..1.0));
    for i in 0..dims.q2 {
        d21[(i, i)] += 1.0;
    }
    Plant::new(a, b1, b2, c1, c2, d12, d21).expect("generated plant satisfies the invariants")
}

/// Convenience: a fresh seeded generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_plant_dimensions_and_stability() {
        let p = chain_plant();
        assert_eq!((p.n(), p.m1(), p.p2(), p.q1(), p.q2()), (3, 6, 3, 6, 3));
        assert!((p.radius() - (0.5 + 0.2 * 2.0_f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn sweep_plant_dimensions_and_stability() {
        let p = sweep_plant();
        assert_eq!((p.n(), p.m1(), p.p2(), p.q1(), p.q2()), (4, 4, 2, 3, 2));
        assert!(p.radius() < 1.0);
    }

    #[test]
    fn sweep_patterns_have_constant_masks() {
        for family in SweepFamily::ALL {
            let pat = sweep_pattern(family, 4);
            assert_eq!(pat.horizon(), 4);
            for lag in 2..=4 {
                assert_eq!(pat.masks()[lag - 1], pat.masks()[0]);
            }
        }
    }

    #[test]
    fn random_plants_are_valid_and_deterministic() {
        let mut rng1 = seeded_rng(42);
        let mut rng2 = seeded_rng(42);
        for _ in 0..5 {
            let p1 = random_stable_plant(&mut rng1, RandomPlantDims::default());
            let p2 = random_stable_plant(&mut rng2, RandomPlantDims::default());
            assert_eq!(p1, p2);
            assert!(p1.radius() < 0.8 + 1e-12);
        }
    }
}
