use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Root of the counter-based random streams. Every Gaussian used by a path
/// is addressed by `(seed, path index, step index)`, so results do not
/// depend on how paths are scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
}

/// Mixes the 64-bit seed into a 256-bit ChaCha key (splitmix64 expansion).
fn key(seed: u64, domain_tag: u64) -> [u8; 32] {
    let mut state = seed ^ domain_tag.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    out
}

const MAIN_TAG: u64 = 0;
const REFINE_TAG: u64 = 1;

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Gaussian stream of path `index`, drawing `dim` normals per step.
    pub fn path(&self, index: u64, dim: usize) -> PathStream {
        PathStream::new(key(self.seed, MAIN_TAG), index, dim, 1)
    }

    /// Auxiliary stream for Brownian-bridge refinement of rejected steps;
    /// up to 32 refinement draws per step.
    pub fn refinement(&self, index: u64, dim: usize) -> PathStream {
        PathStream::new(key(self.seed, REFINE_TAG), index, dim, 32)
    }
}

/// Random access into the normals of one path.
#[derive(Debug, Clone)]
pub struct PathStream {
    rng: ChaCha8Rng,
    index: u64,
    dim: usize,
    slots: u64,
    next_word: u128,
}

impl PathStream {
    fn new(key: [u8; 32], index: u64, dim: usize, slots: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        PathStream { rng, index, dim, slots, next_word: 0 }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fills `out[..dim]` with the standard normals of `(step, slot)`.
    pub fn normals(&mut self, step: u64, slot: u64, out: &mut [f64]) {
        debug_assert!(slot < self.slots);
        let word = ((step * self.slots + slot) * self.dim as u64 * 2) as u128;
        if word != self.next_word {
            self.rng.set_word_pos(word);
        }
        for o in out.iter_mut().take(self.dim) {
            *o = inverse_normal_cdf(uniform_open(self.rng.next_u64()));
        }
        self.next_word = word + self.dim as u128 * 2;
    }
}

/// Maps 53 random bits to the open interval (0, 1).
fn uniform_open(u: u64) -> f64 {
    ((u >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Inverse of the standard normal CDF (Wichura, AS241 "PPND16"), relative
/// accuracy about 1e-16.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_5,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946e4,
        4.592_195_393_154_987e4,
        6.726_577_092_700_87e4,
        3.343_057_558_358_813e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_545e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_546,
        5.769_497_221_460_691,
        3.647_848_324_763_204_5,
        1.270_458_252_452_368_4,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759,
        1.676_384_830_183_803_8,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        2.965_605_718_285_048_7e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_88e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_7e-15,
    ];
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = (-(p.min(1.0 - p)).ln()).sqrt();
    let v = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_quantiles() {
        assert_relative_eq!(inverse_normal_cdf(0.975), 1.959_963_984_540_054, max_relative = 1e-14);
        assert_relative_eq!(inverse_normal_cdf(0.5), 0.0);
        assert_relative_eq!(inverse_normal_cdf(1e-10), -6.361_340_902_404_056, max_relative = 1e-13);
        assert_relative_eq!(inverse_normal_cdf(0.8413447460685429), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn symmetric() {
        for &p in &[1e-8, 0.01, 0.2, 0.4] {
            assert_relative_eq!(inverse_normal_cdf(p), -inverse_normal_cdf(1.0 - p), max_relative = 1e-7);
        }
    }

    #[test]
    fn random_access_matches_sequential_reads() {
        let seeds = SeedStream::new(42);
        let mut seq = seeds.path(7, 3);
        let mut all = Vec::new();
        for k in 0..20 {
            let mut z = [0.0; 3];
            seq.normals(k, 0, &mut z);
            all.push(z);
        }
        let mut rnd = seeds.path(7, 3);
        for k in [13u64, 2, 19, 0, 5] {
            let mut z = [0.0; 3];
            rnd.normals(k, 0, &mut z);
            assert_eq!(z, all[k as usize]);
        }
    }

    #[test]
    fn streams_differ_across_paths_and_seeds() {
        let mut a = [0.0];
        let mut b = [0.0];
        SeedStream::new(1).path(0, 1).normals(0, 0, &mut a);
        SeedStream::new(1).path(1, 1).normals(0, 0, &mut b);
        assert_ne!(a, b);
        SeedStream::new(2).path(0, 1).normals(0, 0, &mut b);
        assert_ne!(a, b);
        SeedStream::new(1).refinement(0, 1).normals(0, 0, &mut b);
        assert_ne!(a, b);
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut s = SeedStream::new(3).path(0, 1);
        let n = 200_000;
        let mut z = [0.0];
        let (mut m1, mut m2) = (0.0, 0.0);
        for k in 0..n {
            s.normals(k, 0, &mut z);
            m1 += z[0];
            m2 += z[0] * z[0];
        }
        let mean = m1 / n as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt());
        assert!((m2 / n as f64 - 1.0).abs() < 0.02);
    }
}
