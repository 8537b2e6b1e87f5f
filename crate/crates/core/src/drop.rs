use rand::Rng;

/// Zeroes each component of `gradient` independently with probability `p`.
///
/// Survivors are left unscaled. Exactly one uniform draw is taken from `rng`
/// per component, whatever the value of `p`, so the stream position after a
/// call depends only on the gradient length.
pub fn random_drop<R: Rng + ?Sized>(gradient: &mut [f64], p: f64, rng: &mut R) {
    debug_assert!((0.0..=1.0).contains(&p));
    for g in gradient {
        let u: f64 = rng.random();
        if u < p {
            *g = 0.0;
        }
    }
}
