//! Seeded splitmix64 PRNG.
//!
//! All randomized steps (viewpoint sampling, synthetic noise, trajectory
//! deltas) draw from this generator so that identical seeds give bit-identical
//! outputs across platforms, runs, and thread counts. Substreams derived from
//! a base seed keep parallel work (per view, per frame) order-independent.

/// splitmix64 generator (Steele, Lea, Flood 2014).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare_gauss: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed, spare_gauss: None }
    }

    /// Derives an independent substream from a base seed and a stream index.
    ///
    /// Used to give each parallel work item (view, frame) its own generator
    /// whose output does not depend on scheduling order.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut mixer = Self::new(seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F));
        let derived = mixer.next_u64();
        Self::new(derived)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n) without modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Standard normal sample via Box-Muller (one spare cached per pair).
    pub fn next_gauss(&mut self) -> f64 {
        if let Some(v) = self.spare_gauss.take() {
            return v;
        }
        // u1 in (0, 1] so the logarithm is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = std::f64::consts::TAU * u2;
        self.spare_gauss = Some(r * phi.sin());
        r * phi.cos()
    }

    /// Uniformly distributed unit 3-vector.
    pub fn unit_vec3(&mut self) -> [f64; 3] {
        loop {
            let v = [self.next_gauss(), self.next_gauss(), self.next_gauss()];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-12 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
