use rand::Rng;

use crate::heisenberg::{HPoint, UnitaryRotation};

pub fn rand_point<R: Rng>(rng: &mut R, scale: f64) -> HPoint {
    HPoint::new(
        std::array::from_fn(|_| rng.gen_range(-scale..scale)),
        rng.gen_range(-scale * scale..scale * scale),
    )
}

pub fn rand_rotation<R: Rng>(rng: &mut R) -> UnitaryRotation {
    crate::plane::haar_unitary(rng)
}
