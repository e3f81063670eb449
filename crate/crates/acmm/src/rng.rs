//! Deterministic counter-based random number generation.
//!
//! Every randomized component of the crate (optimizer initialization, subset
//! sampling, synthetic data) is keyed by an explicit `u64` seed plus stream
//! labels, so identical inputs reproduce identical runs regardless of thread
//! count or platform. SplitMix64 is enough at this scale and avoids pulling
//! in a crate whose algorithm might change under us.

#[derive(Clone, Debug)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Derive an independent stream from a seed and stream labels.
    ///
    /// Mixing happens through the SplitMix64 output function, so nearby
    /// (seed, label) pairs give unrelated streams.
    pub fn stream(seed: u64, labels: &[u64]) -> Self {
        let mut r = Rng::new(seed);
        for &l in labels {
            let mixed = r.next_u64() ^ l.wrapping_mul(0x9e37_79b9_7f4a_7c15);
            r = Rng::new(mixed);
        }
        r
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, bound)` by rejection, exact for every bound.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    pub fn next_normal(&mut self) -> f64 {
        loop {
            let u1 = self.next_f64();
            if u1 > 0.0 {
                let u2 = self.next_f64();
                return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            }
        }
    }

    /// A sorted size-`k` subset of `0..n`, sampled uniformly.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.next_below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut chosen = pool[..k].to_vec();
        chosen.sort_unstable();
        chosen
    }
}
