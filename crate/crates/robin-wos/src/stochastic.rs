//! Reproducible random streams and exact uniform sampling on spheres — the
//! sole sources of randomness in the crate.
//!
//! Every Monte Carlo path owns an [`RngStream`] addressed by `(base_seed,
//! stream_id)`. Streams are backed by the ChaCha block cipher, whose 64-bit
//! stream counter gives O(1) indexing into independent substreams: stream
//! construction never touches any other stream, so paths can run on any
//! thread in any order and still reproduce bit-for-bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::Point3;

/// A seeded, independently indexable random stream (one per path).
#[derive(Clone, Debug)]
pub struct RngStream {
    base_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

/// Deterministic stream for `(base_seed, stream_id)`; creation is O(1) and
/// independent of every other stream.
pub fn make_stream(base_seed: u64, stream_id: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream_id);
    RngStream { base_seed, stream_id, rng }
}

impl RngStream {
    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Standard normal draw (used only by the 1-D Brownian oracle).
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// Uniform point on the sphere of given center and radius.
///
/// Inverse-CDF sampling: the polar cosine of an area-uniform point is uniform
/// on [-1, 1] and the azimuth is uniform on [0, 2*pi). Exactly two uniforms
/// per draw, in that order, with no rejection branch — the draw count per
/// step is constant, which keeps streams aligned across code paths.
pub fn uniform_on_sphere(stream: &mut RngStream, center: Point3, radius: f64) -> Point3 {
    debug_assert!(radius > 0.0);
    let cos_theta = 2.0 * stream.uniform() - 1.0;
    let phi = 2.0 * std::f64::consts::PI * stream.uniform();
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    let dir = Point3::new(sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta);
    center + dir * radius
}
